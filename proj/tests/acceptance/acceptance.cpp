// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/core.h>

#include "igsmc/errors.hpp"
#include "igsmc/kernels.hpp"
#include "igsmc/ode.hpp"
#include "igsmc/regularize.hpp"
#include "igsmc/smc.hpp"
#include "igsmc_tools/experiment.hpp"
#include "oracles.hpp"

using namespace igsmc;
using namespace igsmc::tools;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  double time_limit;  // seconds, 0 for none
  std::function<Outcome()> check;
};

// ---------------------------------------------------------------- 1

Outcome geodesic_ordering() {
  const ExperimentSpec s = default_spec("geodesic-ess");
  std::size_t wins = 0;
  std::string finals;
  for (std::size_t r = 0; r < s.replicates; ++r) {
    const std::uint64_t seed = replicate_seed(s.seed, r);
    double geo = 0.0, best_other = 0.0;
    for (const auto& path : s.geodesic.paths) {
      GaussianPathSequence seq(gaussian_path(s.geodesic, path, s.populations));
      SmcConfig c = s.smc;
      c.seed = seed;
      c.threads = 1;
      const auto res = run(c, seq, gaussian_sampler(s.geodesic.start_mean, s.geodesic.start_var));
      const double e = res.diagnostics.back().ess;
      if (path == "geodesic")
        geo = e;
      else
        best_other = std::max(best_other, e);
    }
    wins += geo > best_other;
    finals += fmt::format("{}{:.0f}/{:.0f}", r ? " " : "", geo, best_other);
  }
  return {wins >= 8, fmt::format("geodesic best in {}/{} replicates; final ESS geodesic/best other: {}",
                                 wins, s.replicates, finals)};
}

// ---------------------------------------------------------------- 2

Outcome univariate_inference() {
  const ExperimentSpec s = default_spec("uni-infer");
  const auto setup = inference_setup(s);
  const auto res = run_inference(s, setup, replicate_seed(s.seed, 0), s.smc.kernel.type,
                                 s.populations, 1);
  const auto& m = s.model;
  const auto oracle = oracle::univariate_posterior(univariate_data(m), m.u1, m.v1, m.u2, m.v2, 1.0, 400);
  const double ess = res.final_population.ess;
  const double se = res.summary.sd[0] / std::sqrt(ess);
  const double z = (res.summary.mean[0] - oracle.mean_mu) / se;
  return {std::abs(z) <= 3.0,
          fmt::format("mean mu {:.4f}, oracle {:.4f}, SE {:.4f} (ESS {:.0f}), |z| {:.2f}; mean sigma {:.3f} vs {:.3f}",
                      res.summary.mean[0], oracle.mean_mu, se, ess, std::abs(z),
                      res.summary.mean[1], oracle.mean_sigma)};
}

// ---------------------------------------------------------------- 3

Vector draw_box(std::mt19937_64& rng, const std::vector<std::pair<double, double>>& box) {
  Vector v(static_cast<Eigen::Index>(box.size()));
  for (std::size_t i = 0; i < box.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = std::uniform_real_distribution<double>(box[i].first, box[i].second)(rng);
  return v;
}

struct SensitivityError {
  double first = 0.0, second = 0.0;
};

// Normwise relative error per parameter (block), maximised over blocks.
SensitivityError sensitivity_error(const OdeSystem& sys, const Vector& x0, const Vector& xi,
                                   const std::vector<double>& times) {
  IntegratorOptions under_test;  // rtol 1e-8
  IntegratorOptions reference;
  reference.rtol = 1e-12;
  reference.atol = 1e-13;
  const auto s = integrate_with_sensitivities(sys, x0, xi, times, 2, under_test);
  const std::size_t T = times.size(), D = x0.size(), P = static_cast<std::size_t>(xi.size());
  SensitivityError out;
  // first order: differences of trajectories
  for (std::size_t i = 0; i < P; ++i) {
    const double h = 1e-5 * std::max(std::abs(xi[static_cast<Eigen::Index>(i)]), 1e-2);
    Vector p = xi, m = xi;
    p[static_cast<Eigen::Index>(i)] += h;
    m[static_cast<Eigen::Index>(i)] -= h;
    const Matrix fd = (integrate(sys, x0, p, times, reference).states -
                       integrate(sys, x0, m, times, reference).states) / (2 * h);
    double num = 0, den = 0;
    for (std::size_t t = 0; t < T; ++t)
      for (std::size_t d = 0; d < D; ++d) {
        num = std::max(num, std::abs(s.S(t, i, d) - fd(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d))));
        den = std::max(den, std::abs(fd(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(d))));
      }
    out.first = std::max(out.first, num / den);
  }
  // second order: differences of first-order sensitivities
  for (std::size_t k = 0; k < P; ++k) {
    const double h = 1e-5 * std::max(std::abs(xi[static_cast<Eigen::Index>(k)]), 1e-2);
    Vector p = xi, m = xi;
    p[static_cast<Eigen::Index>(k)] += h;
    m[static_cast<Eigen::Index>(k)] -= h;
    const auto sp = integrate_with_sensitivities(sys, x0, p, times, 1, reference);
    const auto sm = integrate_with_sensitivities(sys, x0, m, times, 1, reference);
    for (std::size_t i = 0; i < P; ++i) {
      double num = 0, den = 0;
      for (std::size_t t = 0; t < T; ++t)
        for (std::size_t d = 0; d < D; ++d) {
          const double fd = (sp.S(t, i, d) - sm.S(t, i, d)) / (2 * h);
          num = std::max(num, std::abs(s.dS(t, k, i, d) - fd));
          den = std::max(den, std::abs(fd));
        }
      out.second = std::max(out.second, num / den);
    }
  }
  return out;
}

Outcome sensitivity_correctness() {
  std::mt19937_64 rng(2024);
  const auto fn_times = equally_spaced_times(0.0, 10.0, 25);
  const auto lv_times = equally_spaced_times(0.0, 10.0, 20);
  const auto fn = fitzhugh_nagumo_system();
  const auto lv = lotka_volterra_system();
  SensitivityError worst_fn, worst_lv;
  for (int k = 0; k < 20; ++k) {
    const auto e = sensitivity_error(*fn, Vector{{-1.0, 1.0}},
                                     draw_box(rng, {{0.05, 0.6}, {0.05, 0.6}, {1.0, 5.0}}), fn_times);
    worst_fn.first = std::max(worst_fn.first, e.first);
    worst_fn.second = std::max(worst_fn.second, e.second);
  }
  for (int k = 0; k < 20; ++k) {
    const auto e = sensitivity_error(*lv, Vector{{15.0, 30.0}},
                                     draw_box(rng, {{6, 10}, {0.4, 0.6}, {0.15, 0.25}, {0.008, 0.012}}),
                                     lv_times);
    worst_lv.first = std::max(worst_lv.first, e.first);
    worst_lv.second = std::max(worst_lv.second, e.second);
  }
  const double worst = std::max({worst_fn.first, worst_fn.second, worst_lv.first, worst_lv.second});
  return {worst < 1e-4, fmt::format("max rel err FN S {:.1e} dS {:.1e}; LV S {:.1e} dS {:.1e}",
                                    worst_fn.first, worst_fn.second, worst_lv.first,
                                    worst_lv.second)};
}

// ---------------------------------------------------------------- 4

Outcome metric_derivative() {
  IntegratorOptions tight;
  tight.rtol = 1e-11;
  tight.atol = 1e-12;
  const ExperimentSpec s = default_spec("fn-infer");
  const auto model = make_ode_model("fitzhugh-nagumo", s.model, tight);
  std::mt19937_64 rng(7);
  double worst = 0.0;
  for (int n = 0; n < 20; ++n) {
    const Vector xi = draw_box(rng, {{0.05, 0.6}, {0.05, 0.6}, {1.0, 5.0}});
    const double phi = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    const auto mb = model->metric_bundle(xi, phi, true);
    double num = 0, den = 0;
    for (Eigen::Index k = 0; k < xi.size(); ++k) {
      const Matrix fd = oracle::partial(
          [&](const Vector& x) { return model->metric_bundle(x, phi, false).g; }, xi, k, 1e-5);
      for (Eigen::Index i = 0; i < xi.size(); ++i)
        for (Eigen::Index j = 0; j < xi.size(); ++j) {
          num = std::max(num, std::abs(mb.dg(k, i, j) - fd(i, j)));
          den = std::max(den, std::abs(fd(i, j)));
        }
    }
    worst = std::max(worst, num / den);
  }
  return {worst < 1e-4, fmt::format("max rel err {:.1e} over 20 points", worst)};
}

// ---------------------------------------------------------------- 5

Outcome uniform_prior_degeneracy() {
  ExperimentSpec s = default_spec("fn-infer");
  s.model.prior = "uniform";
  const auto model = make_ode_model("fitzhugh-nagumo", s.model);
  const Vector xi{{0.2, 0.2, 3.0}};
  const auto mb = model->metric_bundle(xi, 0.0, true);
  const bool zero = (mb.g.array() == 0.0).all();
  const auto r = regularize(mb.g);
  return {zero && r.singular,
          fmt::format("max |g| = {:g}, singular flag {}, jitter {:g}", mb.g.cwiseAbs().maxCoeff(),
                      r.singular, r.jitter)};
}

// ---------------------------------------------------------------- 6

Outcome ozaki_limit() {
  const ExperimentSpec s = default_spec("uni-infer");
  const auto model = make_univariate_model(s.model);
  const Vector xi{{47.0, 8.5}};
  const double eps[] = {0.2, 0.1, 0.05, 0.025};
  std::vector<double> lx, lm, lc;
  for (double e : eps) {
    const auto o = mmala_ozaki_proposal(*model, xi, 1.0, e);
    const auto u = mmala_euler_proposal(*model, xi, 1.0, e);
    lx.push_back(std::log(e));
    lm.push_back(std::log((o.mean() - u.mean()).norm()));
    lc.push_back(std::log((o.covariance() - u.covariance()).norm()));
  }
  auto slope = [&](const std::vector<double>& y) {
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      mx += lx[i] / y.size();
      my += y[i] / y.size();
    }
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < y.size(); ++i) {
      sxy += (lx[i] - mx) * (y[i] - my);
      sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
  };
  const double sm = slope(lm), sc = slope(lc);

  // scalar OU: target N(0, 1) with unit metric
  GaussianPathSequence seq({{0.0, 1.0}, {0.0, 1.0}});
  GeometryFn geometry = [&](const Vector& x) {
    return local_geometry(seq, 1, seq.evaluate(x, EvalLevel::kMetricDerivative));
  };
  double ou = 0.0;
  for (double x : {-1.5, 0.4, 2.0})
    for (double e : {0.1, 0.5, 1.0}) {
      const Vector v = Vector::Constant(1, x);
      const auto q = mmala_ozaki_proposal(geometry, geometry(v), v, e);
      ou = std::max(ou, std::abs(q.mean()[0] - x * std::exp(-e * e / 2)));
      ou = std::max(ou, std::abs(q.covariance()(0, 0) - (1 - std::exp(-e * e))));
    }
  const bool pass = std::abs(sm - 4.0) <= 0.8 && std::abs(sc - 4.0) <= 0.8 && ou <= 1e-10;
  return {pass, fmt::format("mean slope {:.3f}, covariance slope {:.3f}, OU max err {:.1e}", sm, sc, ou)};
}

// ---------------------------------------------------------------- 7, 8

struct RobustnessRuns {
  bool done = false;
  std::size_t replicates = 0;
  // [kernel][p index][replicate]
  std::vector<std::vector<std::vector<double>>> alpha;
  // p = 30 runs: [kernel][replicate]
  std::vector<std::vector<double>> acceptance;
  std::vector<std::vector<std::size_t>> crossing;
  double seconds = 0.0;
};

const std::vector<std::size_t> kRobustP{15, 30};
const std::vector<KernelType> kRobustKernels{KernelType::kMmalaEuler, KernelType::kAdaptiveMvn};

RobustnessRuns& robustness_runs() {
  static RobustnessRuns runs;
  if (runs.done) return runs;
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentSpec s = default_spec("kernel-robustness");
  s.smc.particles = 300;
  s.replicates = 10;
  const auto setup = inference_setup(s);
  runs.replicates = s.replicates;
  runs.alpha.assign(2, std::vector<std::vector<double>>(kRobustP.size()));
  runs.acceptance.assign(2, {});
  runs.crossing.assign(2, {});
  const double threshold = 0.3 * static_cast<double>(s.smc.particles);
  for (std::size_t r = 0; r < s.replicates; ++r)
    for (std::size_t k = 0; k < 2; ++k)
      for (std::size_t pi = 0; pi < kRobustP.size(); ++pi) {
        const auto res = run_inference(s, setup, replicate_seed(s.seed, r), kRobustKernels[k],
                                       kRobustP[pi], 1);
        runs.alpha[k][pi].push_back(res.summary.mean[0]);
        if (kRobustP[pi] != 30) continue;
        double acc = 0.0;
        for (std::size_t a = 1; a < res.diagnostics.size(); ++a) acc += res.diagnostics[a].acceptance_rate;
        runs.acceptance[k].push_back(acc / static_cast<double>(res.diagnostics.size() - 1));
        // first population whose ESS falls below the threshold; p + 1 if none
        std::size_t cross = res.diagnostics.size() + 1;
        for (const auto& d : res.diagnostics)
          if (d.ess < threshold) {
            cross = d.population;
            break;
          }
        runs.crossing[k].push_back(cross);
      }
  runs.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  runs.done = true;
  return runs;
}

double sample_variance(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m += x / static_cast<double>(v.size());
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size() - 1);
}

Outcome kernel_robustness() {
  const auto& runs = robustness_runs();
  bool pass = true;
  std::string detail;
  for (std::size_t pi = 0; pi < kRobustP.size(); ++pi) {
    const double vm = sample_variance(runs.alpha[0][pi]);
    const double va = sample_variance(runs.alpha[1][pi]);
    pass = pass && vm < va;
    detail += fmt::format("{}p={}: var(alpha) mMALA {:.4f} vs adaptive MVN {:.4f}", pi ? "; " : "",
                          kRobustP[pi], vm, va);
  }
  return {pass, detail};
}

Outcome ess_acceptance_profile() {
  const auto& runs = robustness_runs();
  std::size_t both = 0, acc_wins = 0, cross_wins = 0;
  std::string per;
  for (std::size_t r = 0; r < runs.replicates; ++r) {
    const bool a = runs.acceptance[0][r] > runs.acceptance[1][r];
    const bool c = runs.crossing[0][r] >= runs.crossing[1][r];
    acc_wins += a;
    cross_wins += c;
    both += a && c;
    per += fmt::format("{}{:.2f}/{:.2f}@{}/{}", r ? " " : "", runs.acceptance[0][r],
                       runs.acceptance[1][r], runs.crossing[0][r], runs.crossing[1][r]);
  }
  return {both >= 7, fmt::format("both hold in {}/{} (acceptance {}, crossing {}); "
                                 "acceptance mMALA/MVN @ crossing mMALA/MVN: {}",
                                 both, runs.replicates, acc_wins, cross_wins, per)};
}

// ---------------------------------------------------------------- 9

Outcome drift_heuristic() {
  const ExperimentSpec s = default_spec("uni-drift");
  const auto model = make_univariate_model(s.model);
  const auto grid = univariate_drift_grid();
  double lo0 = INFINITY, hi0 = -INFINITY, lo1 = INFINITY, hi1 = -INFINITY;
  for (const auto& g : grid) {
    lo0 = std::min(lo0, g[0]);
    hi0 = std::max(hi0, g[0]);
    lo1 = std::min(lo1, g[1]);
    hi1 = std::max(hi1, g[1]);
  }
  auto ends = [&](std::size_t p, double eps) {
    TemperedSequence seq(model, TemperingSchedule::geometric(p, s.phi2));
    KernelSpec k = s.smc.kernel;
    k.epsilon = eps;
    return drift_paths(seq, grid, k);
  };
  const auto a = ends(45, 0.4), b = ends(180, 0.2);
  double worst = 0.0;
  std::size_t truncated = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    truncated += a[i].truncated + b[i].truncated;
    const Vector& x = a[i].points.back();
    const Vector& y = b[i].points.back();
    worst = std::max(worst, std::abs(x[0] - y[0]) / (hi0 - lo0));
    worst = std::max(worst, std::abs(x[1] - y[1]) / (hi1 - lo1));
  }
  return {worst <= 0.01 && truncated == 0,
          fmt::format("max endpoint gap {:.3f}% of grid span over {} particles, {} truncated",
                      100 * worst, grid.size(), truncated)};
}

// ---------------------------------------------------------------- 10

Outcome property_suites() {
  struct Suite {
    const char* binary;
    const char* filter;
  };
  const std::vector<Suite> suites{
      {IGSMC_TEST_CORE, "Ess.*:Weights.ShiftInvarianceProperty"},
      {IGSMC_TEST_GEODESIC, "Paths.EndpointsAndPositivity:Paths.GeodesicEquationResidual"},
      {IGSMC_TEST_METRIC, "Truncation.MomentsMatchQuadrature"},
      {IGSMC_TEST_KERNELS, "UniformWalk.KernelDensityTotalMass:DetailedBalance.*"},
      {IGSMC_TEST_SMC, "Smc.BitwiseReproducible"},
  };
  const auto t0 = std::chrono::steady_clock::now();
  std::size_t failed = 0;
  for (const auto& s : suites) {
    const std::string cmd = fmt::format("\"{}\" --gtest_filter='{}' > /dev/null 2>&1", s.binary, s.filter);
    if (std::system(cmd.c_str()) != 0) ++failed;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return {failed == 0 && secs < 60.0,
          fmt::format("{} of {} suites failed, {:.1f} s total", failed, suites.size(), secs)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance checks"};
  std::vector<int> only;
  app.add_option("--only", only, "run just these criteria");
  CLI11_PARSE(app, argc, argv);
  const std::set<int> selected(only.begin(), only.end());

  const std::vector<Criterion> criteria{
      {1, "geodesic path keeps the highest ESS", 120, geodesic_ordering},
      {2, "univariate posterior mean agrees with quadrature", 60, univariate_inference},
      {3, "forward sensitivities match finite differences", 60, sensitivity_correctness},
      {4, "metric derivative matches finite differences", 0, metric_derivative},
      {5, "uniform prior gives a singular zero metric at phi = 0", 0, uniform_prior_degeneracy},
      {6, "Ozaki proposal reduces to Euler at fourth order", 0, ozaki_limit},
      {7, "mMALA estimates of alpha vary less than adaptive MVN", 1800, kernel_robustness},
      {8, "mMALA accepts more and keeps ESS longer", 0, ess_acceptance_profile},
      {9, "drift endpoints depend on the product of step and population count", 0, drift_heuristic},
      {10, "property suites", 60, property_suites},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    if (!selected.empty() && !selected.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    // the shared LV runs are timed once, against criterion 7
    if (c.id == 7) secs = robustness_runs().seconds;
    bool in_time = c.time_limit <= 0.0 || secs < c.time_limit;
    const bool pass = o.pass && in_time;
    if (!pass) ++failures;
    fmt::print("{} criterion {}: {} [{}] ({:.1f} s{})\n", pass ? "PASS" : "FAIL", c.id, c.title,
               o.detail, secs, in_time ? "" : fmt::format(", over the {:.0f} s limit", c.time_limit));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
