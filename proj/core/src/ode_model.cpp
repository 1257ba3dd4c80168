#include "igsmc/ode_model.hpp"

#include <cmath>
#include <random>
#include <tuple>

#include <unsupported/Eigen/AutoDiff>

#include "igsmc/errors.hpp"
#include "igsmc/normal.hpp"

namespace igsmc {

namespace {

constexpr double kLogTwoPi = 1.8378770664093454836;

using AD1 = Eigen::AutoDiffScalar<Eigen::Matrix<double, 1, 1>>;

// Log density of one observation y given the state x under heteroscedastic,
// lower-truncated normal noise; returns the value and d/dx.
std::pair<double, double> extended_observation(double y, double x, double sigma2, double hetero2,
                                               double bound) {
  using std::log;
  using std::sqrt;
  if (y < bound) return {kNegInf, 0.0};
  const AD1 X(x, Eigen::Matrix<double, 1, 1>(1.0));
  const AD1 K = sigma2 + hetero2 * X * X;
  AD1 ll = -0.5 * (kLogTwoPi + log(K)) - (y - X) * (y - X) / (2.0 * K);
  if (bound > kNegInf) {
    const AD1 alpha = (X - bound) / sqrt(K);
    const double a = alpha.value();
    ll -= AD1(normal::log_cdf(a), normal::hazard(a) * alpha.derivatives());
  }
  return {ll.value(), ll.derivatives()[0]};
}

}  // namespace

OdeInferenceModel::OdeInferenceModel(OdeModelConfig config) : config_(std::move(config)) {
  if (!config_.system) throw ConfigurationError("ODE model needs a system");
  const auto dx = config_.system->state_dim();
  if (static_cast<std::size_t>(config_.x0.size()) != dx) throw ShapeError("x0 dimension");
  if (static_cast<std::size_t>(config_.data.rows()) != config_.times.size() ||
      static_cast<std::size_t>(config_.data.cols()) != dx)
    throw ShapeError("data must be (number of times) x (state dimension)");
  if (config_.prior.dim() != config_.system->param_dim()) throw ShapeError("prior dimension");
  config_.noise.validate(dx);
  config_.prior.validate();
  if (config_.noise.kind == NoiseKind::kLognormal && !(config_.data.array() > 0.0).all())
    throw ConfigurationError("log-normal noise needs positive observations");
}

int OdeInferenceModel::sensitivity_order(EvalLevel level) const {
  const int extra = config_.noise.extended() ? 1 : 0;
  switch (level) {
    case EvalLevel::kValue: return 0;
    case EvalLevel::kGradient: return 1;
    case EvalLevel::kMetric: return 1 + extra;
    case EvalLevel::kMetricDerivative: return 2 + extra;
  }
  return 0;
}

OdeInferenceModel::LikelihoodValue OdeInferenceModel::log_likelihood(const SensitivityState& sens,
                                                                     bool with_gradient) const {
  const auto& noise = config_.noise;
  const auto& y = config_.data;
  const std::size_t dx = sens.state_dim(), dp = sens.param_dim(), tau = sens.num_times();
  with_gradient = with_gradient && sens.order() >= 1;
  LikelihoodValue out;
  out.value = 0.0;
  if (with_gradient) out.gradient = Vector::Zero(dp);
  for (std::size_t d = 0; d < dx; ++d) {
    const double s2 = noise.sigma[d] * noise.sigma[d];
    const double h2 = noise.hetero(d) * noise.hetero(d);
    for (std::size_t t = 0; t < tau; ++t) {
      const double x = sens.X(t, d);
      const double obs = y(t, d);
      double ll = 0.0, dll = 0.0;
      if (noise.kind == NoiseKind::kLognormal) {
        if (!(x > 0.0)) return {kNegInf, {}};
        const double r = std::log(obs) - std::log(x);
        ll = -0.5 * (kLogTwoPi + std::log(s2)) - std::log(obs) - 0.5 * r * r / s2;
        dll = r / (s2 * x);
      } else if (noise.extended()) {
        std::tie(ll, dll) = extended_observation(obs, x, s2, h2, noise.lower_bound);
      } else {
        const double r = obs - x;
        ll = -0.5 * (kLogTwoPi + std::log(s2)) - 0.5 * r * r / s2;
        dll = r / s2;
      }
      out.value += ll;
      if (with_gradient)
        for (std::size_t i = 0; i < dp; ++i) out.gradient[i] += dll * sens.S(t, i, d);
    }
  }
  if (!std::isfinite(out.value)) out.value = kNegInf;
  return out;
}

PointEvaluation OdeInferenceModel::evaluate(const Vector& xi, EvalLevel level) const {
  PointEvaluation e;
  e.xi = xi;
  e.level = level;
  if (static_cast<std::size_t>(xi.size()) != dim()) throw ShapeError("parameter dimension");
  e.in_support = config_.prior.in_support(xi);
  if (!e.in_support) return e;

  e.log_prior = config_.prior.log_density(xi);
  try {
    const int order = sensitivity_order(level);
    const auto sens = integrate_with_sensitivities(*config_.system, config_.x0, xi,
                                                   config_.times, order, config_.options);
    const auto lik = log_likelihood(sens, level >= EvalLevel::kGradient);
    e.log_likelihood = lik.value;
    if (!(lik.value > kNegInf)) {
      e.failed = true;
      e.failure = "likelihood is zero";
      return e;
    }
    if (level >= EvalLevel::kGradient) {
      e.grad_log_prior = config_.prior.gradient(xi);
      e.grad_log_likelihood = lik.gradient;
    }
    if (level >= EvalLevel::kMetric) {
      const bool with_dg = level >= EvalLevel::kMetricDerivative;
      auto h = prior_hessian(config_.prior, xi);
      auto g = likelihood_metric(sens, config_.noise, with_dg);
      e.prior_hessian = std::move(h.h);
      e.likelihood_metric = std::move(g.G);
      if (with_dg) {
        e.prior_hessian_derivative = std::move(h.dh);
        e.likelihood_metric_derivative = std::move(g.dG);
      }
    }
  } catch (const IntegrationError& ex) {
    e.failed = true;
    e.failure = ex.what();
    e.log_likelihood = kNegInf;
  } catch (const DomainError& ex) {
    e.failed = true;
    e.failure = ex.what();
    e.log_likelihood = kNegInf;
  } catch (const NumericalDegeneracyError& ex) {
    e.failed = true;
    e.failure = ex.what();
    e.log_likelihood = kNegInf;
  }
  return e;
}

Matrix simulate_observations(const OdeSystem& system, const Vector& x0, const Vector& xi,
                             const std::vector<double>& times, const NoiseModel& noise, Rng& rng,
                             const IntegratorOptions& options) {
  noise.validate(system.state_dim());
  const auto traj = integrate(system, x0, xi, times, options);
  std::normal_distribution<double> n01;
  Matrix y = traj.states;
  for (Eigen::Index t = 0; t < y.rows(); ++t)
    for (Eigen::Index d = 0; d < y.cols(); ++d) {
      const double x = traj.states(t, d);
      const double sd = noise.sigma[d];
      if (noise.kind == NoiseKind::kLognormal) {
        y(t, d) = x * std::exp(sd * n01(rng));
        continue;
      }
      const double h = noise.hetero(static_cast<std::size_t>(d));
      const double k = std::sqrt(sd * sd + h * h * x * x);
      double v;
      int guard = 0;
      do {
        v = x + k * n01(rng);
      } while (v < noise.lower_bound && ++guard < 1000000);
      y(t, d) = v;
    }
  return y;
}

std::vector<double> equally_spaced_times(double t0, double t1, std::size_t n) {
  if (n == 0 || !(t1 > t0)) throw ConfigurationError("need n >= 1 and t1 > t0");
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k)
    out[k] = t0 + (t1 - t0) * static_cast<double>(k + 1) / static_cast<double>(n);
  return out;
}

}  // namespace igsmc
