#include "igsmc/smc.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>

#ifdef IGSMC_HAVE_OPENMP
#include <omp.h>
#endif

#include "igsmc/errors.hpp"

namespace igsmc {

namespace {

// Runs body(n) for n in [0, count), in parallel when OpenMP is available.
// The first exception thrown by any iteration is rethrown after the loop.
template <class Body>
void parallel_for(std::size_t count, int threads, Body&& body) {
  std::exception_ptr error;
#ifdef IGSMC_HAVE_OPENMP
  const int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 4) num_threads(nt)
  for (long long n = 0; n < static_cast<long long>(count); ++n) {
    try {
      body(static_cast<std::size_t>(n));
    } catch (...) {
#pragma omp critical(igsmc_parallel_error)
      if (!error) error = std::current_exception();
    }
  }
#else
  (void)threads;
  for (std::size_t n = 0; n < count; ++n) {
    try {
      body(n);
    } catch (...) {
      if (!error) error = std::current_exception();
    }
  }
#endif
  if (error) std::rethrow_exception(error);
}

double kernel_density_1d(const Vector& prev, const Vector& next, const Gaussian1d& g,
                         double width) {
  return rw_uniform_kernel_density(prev[0], next[0], g, width);
}

// Log denominators of the full-kernel weight, one per particle.
std::vector<double> full_log_denominators(std::span<const Vector> prev,
                                          std::span<const double> w, std::span<const Vector> next,
                                          const Gaussian1d& g, double width,
                                          FullWeightApprox approx) {
  const std::size_t n_part = prev.size();
  std::vector<double> out(n_part);
  if (approx == FullWeightApprox::kPaired) {
    double d = 0.0;
    for (std::size_t m = 0; m < n_part; ++m)
      if (w[m] > 0.0) d += w[m] * kernel_density_1d(prev[m], next[m], g, width);
    std::fill(out.begin(), out.end(), d > 0.0 ? std::log(d) : kNegInf);
    return out;
  }
  for (std::size_t n = 0; n < n_part; ++n) {
    double d = 0.0;
    for (std::size_t m = 0; m < n_part; ++m)
      if (w[m] > 0.0) d += w[m] * kernel_density_1d(prev[m], next[n], g, width);
    out[n] = d > 0.0 ? std::log(d) : kNegInf;
  }
  return out;
}

}  // namespace

void SmcConfig::validate() const {
  if (particles < 2) throw ConfigurationError("need at least two particles");
  if (!(ess_fraction > 0.0 && ess_fraction <= 1.0))
    throw ConfigurationError("ESS fraction must lie in (0, 1]");
  if (mcmc_steps < 1) throw ConfigurationError("need at least one MCMC step per population");
  if (kernel.type == KernelType::kUniformRandomWalk && !(kernel.width > 0.0))
    throw ConfigurationError("uniform random-walk width must be positive");
  if (kernel.type != KernelType::kUniformRandomWalk && kernel.type != KernelType::kAdaptiveMvn &&
      !(kernel.epsilon >= 0.0))
    throw ConfigurationError("mMALA step size must be non-negative");
  if (weight_mode == WeightMode::kFullKernel) {
    if (kernel.type != KernelType::kUniformRandomWalk)
      throw CapabilityError("full-kernel weights need the uniform random-walk kernel");
    if (mcmc_steps != 1) throw CapabilityError("full-kernel weights need one MCMC step");
  }
}

double incremental_weight_simple(const TargetSequence& seq, const Vector& xi_prev, std::size_t a) {
  const PointEvaluation e = seq.evaluate(xi_prev, EvalLevel::kValue);
  if (!e.usable()) return kNegInf;
  return seq.log_incremental(a, e);
}

FullWeight incremental_weight_full(const TargetSequence& seq, std::span<const Vector> prev,
                                   std::span<const double> prev_weights,
                                   std::span<const Vector> next, std::size_t n, std::size_t a,
                                   double width, FullWeightApprox approx) {
  const auto g = seq.gaussian_1d(a);
  if (!g) throw CapabilityError("full-kernel weights need a one-dimensional Gaussian target");
  if (prev.size() != next.size() || prev.size() != prev_weights.size() || n >= next.size())
    throw ShapeError("full-kernel weight: population sizes differ");
  double d = 0.0;
  if (approx == FullWeightApprox::kPaired) {
    for (std::size_t m = 0; m < prev.size(); ++m)
      d += prev_weights[m] * kernel_density_1d(prev[m], next[m], *g, width);
  } else {
    for (std::size_t m = 0; m < prev.size(); ++m)
      d += prev_weights[m] * kernel_density_1d(prev[m], next[n], *g, width);
  }
  FullWeight out;
  if (!(d > 0.0)) {
    out.zero_denominator = true;
    return out;
  }
  const PointEvaluation e = seq.evaluate(next[n], EvalLevel::kValue);
  if (!e.usable()) return out;
  out.log_weight = seq.log_gamma(a, e) - std::log(d);
  return out;
}

PosteriorSummary summarize(std::span<const Vector> positions, std::span<const double> weights) {
  if (positions.empty()) throw ConfigurationError("cannot summarize an empty population");
  if (positions.size() != weights.size()) throw ShapeError("summarize: size mismatch");
  const Eigen::Index d = positions[0].size();
  PosteriorSummary s;
  s.mean = Vector::Zero(d);
  for (std::size_t n = 0; n < positions.size(); ++n) s.mean += weights[n] * positions[n];
  s.covariance = Matrix::Zero(d, d);
  for (std::size_t n = 0; n < positions.size(); ++n) {
    const Vector c = positions[n] - s.mean;
    s.covariance += weights[n] * c * c.transpose();
  }
  s.sd = s.covariance.diagonal().cwiseMax(0.0).cwiseSqrt();
  s.correlation = Matrix::Identity(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      if (i == j) continue;
      const double den = s.sd[i] * s.sd[j];
      s.correlation(i, j) = den > 0.0 ? s.covariance(i, j) / den : kNaN;
    }
  return s;
}

PosteriorSummary summarize(const Population& pop) {
  std::vector<Vector> xs;
  xs.reserve(pop.size());
  for (const auto& p : pop.particles) xs.push_back(p.position);
  const std::vector<double> w = pop.weights();
  return summarize(xs, w);
}

SmcResult run(const SmcConfig& config, const TargetSequence& seq, const PriorSampler& prior) {
  config.validate();
  if (!prior) throw ConfigurationError("no prior sampler given");
  const std::size_t N = config.particles;
  const std::size_t p = seq.length();
  if (p < 1) throw ConfigurationError("empty target sequence");
  const bool full = config.weight_mode == WeightMode::kFullKernel;
  if (full)
    for (std::size_t a = 0; a < p; ++a)
      if (!seq.gaussian_1d(a))
        throw CapabilityError("full-kernel weights need one-dimensional Gaussian targets");

  TransitionKernel kernel(config.kernel);
  const EvalLevel level = kernel.level();

  SmcResult result;
  result.parameter_names = seq.parameter_names();
  std::vector<PointEvaluation> evals(N);
  std::vector<double> log_w(N, -std::log(static_cast<double>(N)));
  std::vector<double> w(N, 1.0 / static_cast<double>(N));
  std::size_t failures = 0;

  parallel_for(N, config.threads, [&](std::size_t n) {
    Rng rng = make_stream(config.seed, 0, n);
    Vector x = prior(rng);
    if (static_cast<std::size_t>(x.size()) != seq.dim())
      throw ShapeError("prior sample has the wrong dimension");
    evals[n] = seq.evaluate(x, level);
  });
  for (std::size_t n = 0; n < N; ++n) {
    if (evals[n].failed) ++failures;
    // A draw the first target cannot evaluate carries no weight.
    if (!evals[n].usable() || !(seq.log_gamma(0, evals[n]) > kNegInf)) log_w[n] = kNegInf;
  }
  {
    NormalizedWeights nw;
    try {
      nw = normalize_weights(log_w);
    } catch (const DegeneratePopulationError& e) {
      throw DegeneratePopulationError(e.what(), 1);
    }
    w = nw.weights;
    for (std::size_t n = 0; n < N; ++n) log_w[n] = std::log(w[n]);
  }
  double current_ess = ess(w);

  auto snapshot = [&](std::size_t population) {
    PopulationSnapshot s;
    s.population = population;
    s.weights = w;
    s.positions.reserve(N);
    for (const auto& e : evals) s.positions.push_back(e.xi);
    result.history.push_back(std::move(s));
  };

  PopulationDiagnostics first;
  first.population = 1;
  first.phi = seq.phi(0);
  first.ess = current_ess;
  first.integration_failures = failures;
  result.diagnostics.push_back(first);
  if (config.keep_history) snapshot(1);

  std::vector<double> inc(N);
  std::vector<std::size_t> accepted(N), jitters(N), failed(N);
  std::vector<Vector> prev_positions(N);

  for (std::size_t a = 1; a < p; ++a) {
    PopulationDiagnostics diag;
    diag.population = a + 1;
    diag.phi = seq.phi(a);

    if (config.resampling && current_ess < config.ess_fraction * static_cast<double>(N)) {
      Rng rng = make_stream(config.seed, a, kResampleStream);
      const auto idx = resample_indices(w, rng, config.scheme);
      std::vector<PointEvaluation> next(N);
      for (std::size_t n = 0; n < N; ++n) next[n] = evals[idx[n]];
      evals.swap(next);
      std::fill(w.begin(), w.end(), 1.0 / static_cast<double>(N));
      std::fill(log_w.begin(), log_w.end(), -std::log(static_cast<double>(N)));
      diag.resampled = true;
    }

    if (!full) {
      for (std::size_t n = 0; n < N; ++n) inc[n] = seq.log_incremental(a, evals[n]);
    }
    for (std::size_t n = 0; n < N; ++n) prev_positions[n] = evals[n].xi;

    if (config.kernel.type == KernelType::kAdaptiveMvn) {
      // Only particles that still carry weight shape the perturbation.
      std::vector<Vector> live;
      std::vector<double> lw;
      for (std::size_t n = 0; n < N; ++n)
        if (w[n] > 0.0) {
          live.push_back(evals[n].xi);
          lw.push_back(w[n]);
        }
      kernel.prepare(live, lw);
    }

    parallel_for(N, config.threads, [&](std::size_t n) {
      accepted[n] = jitters[n] = failed[n] = 0;
      if (!evals[n].usable() || !(seq.log_gamma(a, evals[n]) > kNegInf)) return;
      Rng rng = make_stream(config.seed, a, n);
      for (std::size_t s = 0; s < config.mcmc_steps; ++s) {
        MoveRecord rec = kernel.move(seq, a, evals[n], rng);
        if (rec.jittered) ++jitters[n];
        if (rec.failed) ++failed[n];
        if (rec.accepted) {
          ++accepted[n];
          evals[n] = std::move(rec.evaluation);
        }
      }
    });

    std::size_t n_acc = 0;
    for (std::size_t n = 0; n < N; ++n) {
      n_acc += accepted[n];
      diag.jitter_events += jitters[n];
      diag.integration_failures += failed[n];
    }
    diag.acceptance_rate =
        static_cast<double>(n_acc) / static_cast<double>(N * config.mcmc_steps);

    if (full) {
      const Gaussian1d g = *seq.gaussian_1d(a);
      std::vector<Vector> next_positions(N);
      for (std::size_t n = 0; n < N; ++n) next_positions[n] = evals[n].xi;
      const std::vector<double> log_den =
          full_log_denominators(prev_positions, w, next_positions, g, config.kernel.width,
                                config.full_weight_approx);
      for (std::size_t n = 0; n < N; ++n) {
        if (log_den[n] == kNegInf) {
          diag.zero_denominator = true;
          inc[n] = kNegInf;
          continue;
        }
        inc[n] = evals[n].usable() ? seq.log_gamma(a, evals[n]) - log_den[n] : kNegInf;
      }
      if (config.full_weight_approx == FullWeightApprox::kMarginalMixture) {
        // The marginal weight replaces the previous weights entirely.
        std::fill(log_w.begin(), log_w.end(), 0.0);
      }
    }

    for (std::size_t n = 0; n < N; ++n) {
      if (log_w[n] == kNegInf || inc[n] == kNegInf)
        log_w[n] = kNegInf;
      else
        log_w[n] += inc[n];
    }
    NormalizedWeights nw;
    try {
      nw = normalize_weights(log_w);
    } catch (const DegeneratePopulationError& e) {
      throw DegeneratePopulationError(e.what(), a + 1);
    }
    w = nw.weights;
    for (std::size_t n = 0; n < N; ++n) log_w[n] = w[n] > 0.0 ? std::log(w[n]) : kNegInf;
    current_ess = ess(w);
    diag.ess = current_ess;
    result.diagnostics.push_back(diag);
    if (config.keep_history) snapshot(a + 1);
  }

  Population& fp = result.final_population;
  fp.temper_index = p - 1;
  fp.ess = current_ess;
  fp.acceptance_rate = result.diagnostics.back().acceptance_rate;
  fp.particles.resize(N);
  for (std::size_t n = 0; n < N; ++n) fp.particles[n] = Particle{evals[n].xi, log_w[n]};
  std::vector<Vector> xs(N);
  for (std::size_t n = 0; n < N; ++n) xs[n] = evals[n].xi;
  result.summary = summarize(xs, w);
  return result;
}

std::vector<DriftPath> drift_paths(const TargetSequence& seq, std::span<const Vector> starts,
                                   const KernelSpec& kernel_spec) {
  if (kernel_spec.type != KernelType::kMmalaEuler &&
      kernel_spec.type != KernelType::kMmalaSimplified &&
      kernel_spec.type != KernelType::kMmalaOzaki)
    throw ConfigurationError("drift paths need an mMALA kernel");
  const TransitionKernel kernel(kernel_spec);
  std::vector<DriftPath> paths(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    DriftPath& path = paths[i];
    path.points.push_back(starts[i]);
    for (std::size_t a = 1; a < seq.length(); ++a) {
      const Vector& x = path.points.back();
      try {
        const PointEvaluation e = seq.evaluate(x, kernel.level());
        if (!e.usable()) {
          path.truncated = true;
          path.reason = e.in_support ? "evaluation failed" : "left the support";
          break;
        }
        const KernelProposal q = kernel.proposal(seq, a, e);
        if (!q.mean().allFinite()) {
          path.truncated = true;
          path.reason = "non-finite drift";
          break;
        }
        path.points.push_back(q.mean());
      } catch (const SingularMetricError& err) {
        path.truncated = true;
        path.reason = err.what();
        break;
      } catch (const DomainError& err) {
        path.truncated = true;
        path.reason = err.what();
        break;
      }
    }
  }
  return paths;
}

}  // namespace igsmc
