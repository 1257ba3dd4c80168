#include "igsmc/metric.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <type_traits>

#include <unsupported/Eigen/AutoDiff>

#include "igsmc/errors.hpp"
#include "igsmc/normal.hpp"

namespace igsmc {

namespace {
constexpr double kLogTwoPi = 1.8378770664093454836;
// log(1e-300): below this Phi(alpha) is treated as underflowed.
constexpr double kLogUnderflow = -690.7755278982137;
}  // namespace

NoiseModel NoiseModel::normal(Vector sigma) {
  NoiseModel n;
  n.sigma = std::move(sigma);
  return n;
}

NoiseModel NoiseModel::lognormal(Vector sigma) {
  NoiseModel n;
  n.kind = NoiseKind::kLognormal;
  n.sigma = std::move(sigma);
  return n;
}

bool NoiseModel::heteroscedastic() const {
  return hetero_sigma.size() > 0 && (hetero_sigma.array() != 0.0).any();
}

void NoiseModel::validate(std::size_t species) const {
  if (static_cast<std::size_t>(sigma.size()) != species)
    throw ShapeError("noise sigma must have one entry per species");
  if (!(sigma.array() > 0.0).all()) throw ConfigurationError("noise sigma must be positive");
  if (hetero_sigma.size() != 0) {
    if (static_cast<std::size_t>(hetero_sigma.size()) != species)
      throw ShapeError("heteroscedastic scale must have one entry per species");
    if ((hetero_sigma.array() < 0.0).any())
      throw ConfigurationError("heteroscedastic scale must be non-negative");
  }
  if (kind == NoiseKind::kLognormal && extended())
    throw ConfigurationError("log-normal noise cannot be heteroscedastic or truncated");
}

PriorSpec PriorSpec::uniform(Vector lower, Vector upper) {
  PriorSpec p;
  p.kind = PriorKind::kUniform;
  p.lower = std::move(lower);
  p.upper = std::move(upper);
  p.validate();
  return p;
}

PriorSpec PriorSpec::mvn(Vector mean, Matrix covariance, bool positivity) {
  PriorSpec p;
  p.kind = PriorKind::kMvn;
  p.mean = std::move(mean);
  p.covariance = std::move(covariance);
  p.positivity = positivity;
  p.validate();
  return p;
}

PriorSpec PriorSpec::cw_lognormal(Vector log_mean, Vector log_sd) {
  PriorSpec p;
  p.kind = PriorKind::kCwLognormal;
  p.log_mean = std::move(log_mean);
  p.log_sd = std::move(log_sd);
  p.validate();
  return p;
}

std::size_t PriorSpec::dim() const {
  switch (kind) {
    case PriorKind::kUniform: return static_cast<std::size_t>(lower.size());
    case PriorKind::kMvn: return static_cast<std::size_t>(mean.size());
    case PriorKind::kCwLognormal: return static_cast<std::size_t>(log_mean.size());
  }
  return 0;
}

void PriorSpec::validate() const {
  switch (kind) {
    case PriorKind::kUniform:
      if (lower.size() != upper.size() || lower.size() == 0)
        throw ShapeError("uniform prior bounds must match");
      if (!(lower.array() < upper.array()).all())
        throw ConfigurationError("uniform prior needs lower < upper");
      break;
    case PriorKind::kMvn: {
      if (covariance.rows() != mean.size() || covariance.cols() != mean.size())
        throw ShapeError("MVN prior covariance must match the mean");
      if (!covariance.isApprox(covariance.transpose()))
        throw ConfigurationError("MVN prior covariance must be symmetric");
      Eigen::LLT<Matrix> llt(covariance);
      if (llt.info() != Eigen::Success)
        throw ConfigurationError("MVN prior covariance must be positive definite");
      break;
    }
    case PriorKind::kCwLognormal:
      if (log_mean.size() != log_sd.size() || log_mean.size() == 0)
        throw ShapeError("log-normal prior parameters must match");
      if (!(log_sd.array() > 0.0).all())
        throw ConfigurationError("log-normal prior scales must be positive");
      break;
  }
}

bool PriorSpec::in_support(const Vector& xi) const {
  if (static_cast<std::size_t>(xi.size()) != dim() || !xi.allFinite()) return false;
  if (positivity && !(xi.array() > 0.0).all()) return false;
  switch (kind) {
    case PriorKind::kUniform:
      return (xi.array() >= lower.array()).all() && (xi.array() <= upper.array()).all();
    case PriorKind::kMvn: return true;
    case PriorKind::kCwLognormal: return (xi.array() > 0.0).all();
  }
  return false;
}

double PriorSpec::log_density(const Vector& xi) const {
  if (!in_support(xi)) return kNegInf;
  const double d = static_cast<double>(dim());
  switch (kind) {
    case PriorKind::kUniform: return -(upper - lower).array().log().sum();
    case PriorKind::kMvn: {
      Eigen::LLT<Matrix> llt(covariance);
      const Vector z = llt.matrixL().solve(xi - mean);
      const double log_det = 2.0 * Matrix(llt.matrixL()).diagonal().array().log().sum();
      return -0.5 * (z.squaredNorm() + log_det + d * kLogTwoPi);
    }
    case PriorKind::kCwLognormal: {
      double s = 0.0;
      for (Eigen::Index i = 0; i < xi.size(); ++i) {
        const double z = (std::log(xi[i]) - log_mean[i]) / log_sd[i];
        s += -std::log(xi[i]) - std::log(log_sd[i]) - 0.5 * kLogTwoPi - 0.5 * z * z;
      }
      return s;
    }
  }
  return kNegInf;
}

Vector PriorSpec::gradient(const Vector& xi) const {
  if (!in_support(xi)) throw OutOfSupportError("prior gradient outside the support");
  switch (kind) {
    case PriorKind::kUniform: return Vector::Zero(xi.size());
    case PriorKind::kMvn: return -covariance.llt().solve(xi - mean);
    case PriorKind::kCwLognormal: {
      Vector g(xi.size());
      for (Eigen::Index i = 0; i < xi.size(); ++i)
        g[i] = -1.0 / xi[i] - (std::log(xi[i]) - log_mean[i]) / (log_sd[i] * log_sd[i] * xi[i]);
      return g;
    }
  }
  return {};
}

Vector PriorSpec::sample(Rng& rng) const {
  std::normal_distribution<double> n01;
  const auto d = static_cast<Eigen::Index>(dim());
  for (int attempt = 0; attempt < 100000; ++attempt) {
    Vector x(d);
    switch (kind) {
      case PriorKind::kUniform: {
        std::uniform_real_distribution<double> u01(0.0, 1.0);
        for (Eigen::Index i = 0; i < d; ++i) x[i] = lower[i] + (upper[i] - lower[i]) * u01(rng);
        break;
      }
      case PriorKind::kMvn: {
        Vector z(d);
        for (Eigen::Index i = 0; i < d; ++i) z[i] = n01(rng);
        x = mean + Matrix(covariance.llt().matrixL()) * z;
        break;
      }
      case PriorKind::kCwLognormal:
        for (Eigen::Index i = 0; i < d; ++i) x[i] = std::exp(log_mean[i] + log_sd[i] * n01(rng));
        break;
    }
    if (in_support(x)) return x;
  }
  throw ConfigurationError("prior support has negligible mass under the positivity constraint");
}

PriorHessian prior_hessian(const PriorSpec& prior, const Vector& xi) {
  const auto d = static_cast<std::size_t>(prior.dim());
  if (static_cast<std::size_t>(xi.size()) != d) throw ShapeError("prior dimension mismatch");
  PriorHessian out{Matrix::Zero(d, d), Tensor3(d, d, d)};
  switch (prior.kind) {
    case PriorKind::kUniform:
      for (std::size_t i = 0; i < d; ++i) {
        const double x = xi[i], lo = prior.lower[i], hi = prior.upper[i];
        if (x < lo || x > hi) throw OutOfSupportError("outside the uniform prior support");
        if (x == lo || x == hi) throw BoundaryError("prior derivatives undefined on the boundary");
      }
      break;
    case PriorKind::kMvn:
      out.h = prior.covariance.inverse();
      out.h = 0.5 * (out.h + out.h.transpose());
      break;
    case PriorKind::kCwLognormal:
      for (std::size_t i = 0; i < d; ++i) {
        const double x = xi[i];
        if (!(x > 0.0)) throw OutOfSupportError("log-normal prior needs positive parameters");
        const double m = prior.log_mean[i], s = prior.log_sd[i];
        const double l = std::log(x);
        out.h(i, i) = (1.0 - l + m) / (x * x * s * s);
        out.dh(i, i, i) = -(3.0 - 2.0 * l + 2.0 * m) / (x * x * x * s * s);
      }
      break;
  }
  return out;
}

LikelihoodMetric normal_likelihood_metric(const SensitivityState& sens, const NoiseModel& noise,
                                          bool with_derivative) {
  const std::size_t dx = sens.state_dim(), dp = sens.param_dim(), tau = sens.num_times();
  noise.validate(dx);
  if (sens.order() < 1) throw CapabilityError("metric needs first-order sensitivities");
  if (with_derivative && sens.order() < 2)
    throw CapabilityError("metric derivative needs second-order sensitivities");
  LikelihoodMetric out;
  out.G = Matrix::Zero(dp, dp);
  for (std::size_t d = 0; d < dx; ++d) {
    const double prec = 1.0 / (noise.sigma[d] * noise.sigma[d]);
    for (std::size_t t = 0; t < tau; ++t)
      for (std::size_t i = 0; i < dp; ++i)
        for (std::size_t j = 0; j <= i; ++j) out.G(i, j) += prec * sens.S(t, i, d) * sens.S(t, j, d);
  }
  out.G = out.G.selfadjointView<Eigen::Lower>();
  if (!with_derivative) return out;

  out.dG = Tensor3(dp, dp, dp);
  out.has_dG = true;
  for (std::size_t d = 0; d < dx; ++d) {
    const double prec = 1.0 / (noise.sigma[d] * noise.sigma[d]);
    for (std::size_t t = 0; t < tau; ++t)
      for (std::size_t k = 0; k < dp; ++k)
        for (std::size_t i = 0; i < dp; ++i)
          for (std::size_t j = 0; j < dp; ++j)
            out.dG(k, i, j) += prec * (sens.dS(t, k, i, d) * sens.S(t, j, d) +
                                       sens.S(t, i, d) * sens.dS(t, k, j, d));
  }
  return out;
}

namespace {

using AD = Eigen::AutoDiffScalar<Eigen::VectorXd>;

template <typename T>
T hazard_of(const T& z) {
  if constexpr (std::is_same_v<T, double>) {
    return normal::hazard(z);
  } else {
    const double v = z.value();
    return T(normal::hazard(v), normal::hazard_derivative(v) * z.derivatives());
  }
}

double value_of(double x) { return x; }
double value_of(const AD& x) { return x.value(); }

// Contribution of one observation to g_ij, as a function of the state X,
// its sensitivities S_i and their derivatives DS_ij = d_i S_j. Evaluated with
// T = double for the metric and with forward-mode dual numbers, seeded with
// the next order of sensitivities, for its derivative.
template <typename T>
struct ObservationMetric {
  double sigma2, hetero2, bound;
  std::size_t time_index;

  void operator()(const T& X, const std::vector<T>& S, const std::vector<std::vector<T>>& DS,
                  std::vector<std::vector<T>>& g) const {
    using std::sqrt;
    const std::size_t n = S.size();
    const T K = sigma2 + hetero2 * X * X;
    const T P = 1.0 / K;
    std::vector<T> dK(n), dP(n);
    for (std::size_t i = 0; i < n; ++i) {
      dK[i] = 2.0 * hetero2 * X * S[i];
      dP[i] = -dK[i] * P * P;
    }
    T lambda_sqrt_k = T(0.0) * X;
    T J = K;
    if (bound > kNegInf) {
      const T root = sqrt(K);
      const T alpha = (X - bound) / root;
      if (normal::log_cdf(value_of(alpha)) < kLogUnderflow)
        throw NumericalDegeneracyError("truncation probability underflows", time_index);
      const T lambda = hazard_of(alpha);
      lambda_sqrt_k = lambda * root;
      J = K * (1.0 - alpha * lambda);
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        T v = S[i] * S[j] * P;
        if (bound > kNegInf) {
          const T L = P * DS[i][j] + dP[i] * S[j] + dP[j] * S[i];
          v -= lambda_sqrt_k * L;
        }
        if (hetero2 != 0.0) {
          const T ddK = 2.0 * hetero2 * (S[i] * S[j] + X * DS[i][j]);
          const T ddP = 2.0 * dK[i] * dK[j] * P * P * P - ddK * P * P;
          v += 0.5 * ddP * J;
        }
        g[i][j] = v;
      }
  }
};

}  // namespace

LikelihoodMetric extended_likelihood_metric(const SensitivityState& sens, const NoiseModel& noise,
                                            bool with_derivative) {
  const std::size_t dx = sens.state_dim(), dp = sens.param_dim(), tau = sens.num_times();
  noise.validate(dx);
  if (noise.kind != NoiseKind::kNormal)
    throw ConfigurationError("extended metric needs normal noise");
  const bool needs_ds = noise.extended();
  const int need = 1 + (needs_ds ? 1 : 0) + (with_derivative ? 1 : 0);
  if (sens.order() < need)
    throw CapabilityError("extended metric needs sensitivities of order " + std::to_string(need));

  LikelihoodMetric out;
  out.G = Matrix::Zero(dp, dp);
  if (with_derivative) {
    out.dG = Tensor3(dp, dp, dp);
    out.has_dG = true;
  }
  for (std::size_t d = 0; d < dx; ++d) {
    const double sigma2 = noise.sigma[d] * noise.sigma[d];
    const double hetero2 = noise.hetero(d) * noise.hetero(d);
    for (std::size_t t = 0; t < tau; ++t) {
      if (!with_derivative) {
        ObservationMetric<double> f{sigma2, hetero2, noise.lower_bound, t};
        std::vector<double> S(dp);
        std::vector<std::vector<double>> DS(dp, std::vector<double>(dp, 0.0)), g = DS;
        for (std::size_t i = 0; i < dp; ++i) {
          S[i] = sens.S(t, i, d);
          if (needs_ds)
            for (std::size_t j = 0; j < dp; ++j) DS[i][j] = sens.dS(t, i, j, d);
        }
        f(sens.X(t, d), S, DS, g);
        for (std::size_t i = 0; i < dp; ++i)
          for (std::size_t j = 0; j <= i; ++j) out.G(i, j) += g[i][j];
        continue;
      }
      ObservationMetric<AD> f{sigma2, hetero2, noise.lower_bound, t};
      const auto n = static_cast<Eigen::Index>(dp);
      Eigen::VectorXd seed(n);
      for (std::size_t k = 0; k < dp; ++k) seed[k] = sens.S(t, k, d);
      const AD X(sens.X(t, d), seed);
      std::vector<AD> S(dp);
      std::vector<std::vector<AD>> DS(dp, std::vector<AD>(dp, AD(0.0, Eigen::VectorXd::Zero(n))));
      std::vector<std::vector<AD>> g = DS;
      for (std::size_t i = 0; i < dp; ++i) {
        for (std::size_t k = 0; k < dp; ++k) seed[k] = sens.dS(t, k, i, d);
        S[i] = AD(sens.S(t, i, d), seed);
        if (needs_ds)
          for (std::size_t j = 0; j < dp; ++j) {
            for (std::size_t k = 0; k < dp; ++k) seed[k] = sens.ddS(t, k, i, j, d);
            DS[i][j] = AD(sens.dS(t, i, j, d), seed);
          }
      }
      f(X, S, DS, g);
      for (std::size_t i = 0; i < dp; ++i)
        for (std::size_t j = 0; j <= i; ++j) {
          out.G(i, j) += g[i][j].value();
          const auto& der = g[i][j].derivatives();
          for (std::size_t k = 0; k < dp; ++k) {
            const double v = der.size() ? der[k] : 0.0;
            out.dG(k, i, j) += v;
            if (i != j) out.dG(k, j, i) += v;
          }
        }
    }
  }
  out.G = out.G.selfadjointView<Eigen::Lower>();
  return out;
}

LikelihoodMetric likelihood_metric(const SensitivityState& sens, const NoiseModel& noise,
                                   bool with_derivative) {
  if (noise.kind == NoiseKind::kLognormal)
    return normal_likelihood_metric(log_transform(sens), noise, with_derivative);
  if (noise.extended()) return extended_likelihood_metric(sens, noise, with_derivative);
  return normal_likelihood_metric(sens, noise, with_derivative);
}

namespace {
MetricBundle assemble(double phi, const LikelihoodMetric& lik, const PriorSpec& prior,
                      const Vector& xi) {
  if (static_cast<std::size_t>(xi.size()) != static_cast<std::size_t>(lik.G.rows()))
    throw ShapeError("parameter and sensitivity dimensions differ");
  const auto h = prior_hessian(prior, xi);
  MetricBundle mb;
  mb.g = phi * lik.G + h.h;
  if (lik.has_dG) {
    mb.dg = lik.dG;
    mb.dg *= phi;
    mb.dg += h.dh;
    mb.has_dg = true;
  }
  return mb;
}
}  // namespace

MetricBundle fisher_metric(double phi, const SensitivityState& sens, const NoiseModel& noise,
                           const PriorSpec& prior, const Vector& xi) {
  if (noise.extended())
    throw ConfigurationError("heteroscedastic or truncated noise needs fisher_metric_extended");
  return assemble(phi, likelihood_metric(sens, noise, sens.order() >= 2), prior, xi);
}

MetricBundle fisher_metric_extended(double phi, const SensitivityState& sens,
                                    const NoiseModel& noise, const PriorSpec& prior,
                                    const Vector& xi) {
  const int base = noise.extended() ? 2 : 1;
  return assemble(phi, extended_likelihood_metric(sens, noise, sens.order() > base), prior, xi);
}

TruncationTerms truncation_terms(const NoiseModel& noise, const SensitivityState& sens,
                                 std::size_t species) {
  const std::size_t tau = sens.num_times();
  TruncationTerms out{Vector(tau), Vector(tau), Vector(tau), Vector(tau)};
  const double s2 = noise.sigma[species] * noise.sigma[species];
  const double h2 = noise.hetero(species) * noise.hetero(species);
  for (std::size_t t = 0; t < tau; ++t) {
    const double x = sens.X(t, species);
    const double k = s2 + h2 * x * x;
    out.K[t] = k;
    if (noise.truncated()) {
      out.alpha[t] = (x - noise.lower_bound) / std::sqrt(k);
      out.lambda[t] = normal::hazard(out.alpha[t]);
    } else {
      out.alpha[t] = kInf;
      out.lambda[t] = 0.0;
    }
    out.J[t] = noise.truncated() ? k * (1.0 - out.alpha[t] * out.lambda[t]) : k;
  }
  return out;
}

TruncatedMoments truncated_normal_moments(double mu, double sigma, double a, double b) {
  if (!(sigma > 0.0)) throw ConfigurationError("sigma must be positive");
  if (!(a < b)) throw ConfigurationError("truncation needs a < b");
  const double za = (a - mu) / sigma;
  const double zb = (b - mu) / sigma;
  const double log_z = normal::log_interval_probability(za, zb);
  if (log_z < kLogUnderflow) throw DomainError("degenerate truncation: interval has no mass");
  // phi(z)/Z and z phi(z)/Z, zero at infinite bounds.
  auto ratio = [&](double z) { return std::isfinite(z) ? std::exp(normal::log_pdf(z) - log_z) : 0.0; };
  const double ra = ratio(za), rb = ratio(zb);
  const double za_ra = std::isfinite(za) ? za * ra : 0.0;
  const double zb_rb = std::isfinite(zb) ? zb * rb : 0.0;
  const double shift = ra - rb;
  TruncatedMoments m;
  m.mean = mu + sigma * shift;
  m.variance = sigma * sigma * (1.0 + za_ra - zb_rb - shift * shift);
  return m;
}

SensitivityState log_transform(const SensitivityState& sens) {
  const std::size_t dx = sens.state_dim(), dp = sens.param_dim(), tau = sens.num_times();
  const int order = sens.order();
  SensitivityState out(sens.times(), dx, dp, order);
  for (std::size_t t = 0; t < tau; ++t)
    for (std::size_t d = 0; d < dx; ++d) {
      const double x = sens.X(t, d);
      if (!(x > 0.0)) throw DomainError("log-normal noise needs a positive state");
      out.X(t, d) = std::log(x);
      if (order < 1) continue;
      for (std::size_t i = 0; i < dp; ++i) out.S(t, i, d) = sens.S(t, i, d) / x;
      if (order < 2) continue;
      const double x2 = x * x;
      for (std::size_t k = 0; k < dp; ++k)
        for (std::size_t i = 0; i < dp; ++i)
          out.dS(t, k, i, d) = sens.dS(t, k, i, d) / x - sens.S(t, k, d) * sens.S(t, i, d) / x2;
      if (order < 3) continue;
      const double x3 = x2 * x;
      for (std::size_t j = 0; j < dp; ++j)
        for (std::size_t k = 0; k < dp; ++k)
          for (std::size_t i = 0; i < dp; ++i) {
            const double sj = sens.S(t, j, d), sk = sens.S(t, k, d), si = sens.S(t, i, d);
            out.ddS(t, j, k, i, d) = sens.ddS(t, j, k, i, d) / x -
                                     sens.dS(t, k, i, d) * sj / x2 -
                                     (sens.dS(t, j, k, d) * si + sk * sens.dS(t, j, i, d)) / x2 +
                                     2.0 * sk * si * sj / x3;
          }
    }
  return out;
}

}  // namespace igsmc
