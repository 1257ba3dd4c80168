#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "igsmc/errors.hpp"
#include "igsmc/metric.hpp"
#include "igsmc/normal.hpp"
#include "igsmc/ode_model.hpp"
#include "oracles.hpp"

using namespace igsmc;

namespace {

const Vector kFnX0{{-1.0, 1.0}};
const Vector kLvX0{{15.0, 30.0}};

PriorSpec fn_prior() {
  return PriorSpec::mvn(Vector{{0.2, 0.2, 3.0}}, Vector{{0.09, 0.09, 2.25}}.asDiagonal().toDenseMatrix());
}

Vector random_fn(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ab(0.05, 0.6), c(1.0, 5.0);
  return Vector{{ab(rng), ab(rng), c(rng)}};
}

Vector random_lv(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> a(6, 10), b(0.4, 0.6), g(0.15, 0.25), d(0.008, 0.012);
  return Vector{{a(rng), b(rng), g(rng), d(rng)}};
}

IntegratorOptions tight() {
  IntegratorOptions o;
  o.rtol = 1e-11;
  o.atol = 1e-12;
  return o;
}

// Relative error of dg against central differences of g along each coordinate.
double metric_derivative_error(const std::function<MetricBundle(const Vector&, int)>& metric,
                               const Vector& xi) {
  const auto mb = metric(xi, 2);
  double num = 0, den = 0;
  for (Eigen::Index k = 0; k < xi.size(); ++k) {
    const Matrix fd = oracle::partial([&](const Vector& x) { return metric(x, 1).g; }, xi, k, 1e-5);
    for (Eigen::Index i = 0; i < xi.size(); ++i)
      for (Eigen::Index j = 0; j < xi.size(); ++j) {
        num = std::max(num, std::abs(mb.dg(k, i, j) - fd(i, j)));
        den = std::max(den, std::abs(fd(i, j)));
      }
  }
  return num / den;
}

}  // namespace

TEST(Normal, LogCdfAgreesWithErfc) {
  for (double z = -37.0; z <= 8.0; z += 0.173) {
    const double ref = std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
    EXPECT_NEAR(normal::log_cdf(z), ref, 1e-12 * std::max(1.0, std::abs(ref))) << z;
  }
}

TEST(Normal, LogCdfDeepTail) {
  for (double z : {-40.0, -100.0, -1e3, -1e5}) {
    const double z2 = z * z;
    const double series = 1 - 1 / z2 + 3 / (z2 * z2) - 15 / (z2 * z2 * z2) + 105 / std::pow(z2, 4);
    const double ref = -0.5 * z2 - 0.5 * std::log(2 * std::numbers::pi) - std::log(-z) + std::log(series);
    EXPECT_NEAR(normal::log_cdf(z), ref, 1e-12 * std::abs(ref)) << z;
  }
  EXPECT_NEAR(normal::hazard(-1e3), 1e3, 1e-2);
}

TEST(Normal, HazardAtZero) {
  EXPECT_NEAR(normal::hazard(0.0), std::sqrt(2.0 / std::numbers::pi), 1e-15);
  EXPECT_NEAR(normal::hazard(0.0), 0.7979, 5e-5);
  for (double z = -20; z < 10; z += 0.37)
    EXPECT_NEAR(normal::hazard_derivative(z),
                oracle::derivative([](double x) { return normal::hazard(x); }, z, 1e-3),
                1e-8 * std::max(1.0, std::abs(z)));
}

TEST(Normal, IntervalProbabilityBothTails) {
  EXPECT_NEAR(normal::interval_probability(-1, 1), std::erf(1 / std::numbers::sqrt2), 1e-15);
  // upper tail: Phi(-b) - Phi(-a) computed without cancellation
  const double p = normal::interval_probability(30.0, 31.0);
  const double ref = std::exp(normal::log_cdf(-30.0)) - std::exp(normal::log_cdf(-31.0));
  EXPECT_NEAR(p / ref, 1.0, 1e-12);
}

TEST(PriorHessian, Examples) {
  auto h = prior_hessian(PriorSpec::uniform(Vector::Zero(3), Vector::Ones(3)), Vector::Constant(3, 0.5));
  EXPECT_EQ(h.h.norm(), 0.0);
  h = prior_hessian(fn_prior(), Vector{{0.3, 0.1, 2.0}});
  EXPECT_NEAR(h.h(0, 0), 11.111111111111, 1e-9);
  EXPECT_NEAR(h.h(1, 1), 11.111111111111, 1e-9);
  EXPECT_NEAR(h.h(2, 2), 0.444444444444, 1e-9);
  EXPECT_EQ(h.h(0, 1), 0.0);
  const Vector mu{{0.1, -0.5}}, sd{{0.3, 2.0}};
  h = prior_hessian(PriorSpec::cw_lognormal(mu, sd), mu.array().exp().matrix());
  for (int i = 0; i < 2; ++i)
    EXPECT_NEAR(h.h(i, i), 1.0 / std::pow(std::exp(mu[i]) * sd[i], 2), 1e-12);
}

TEST(PriorHessian, LognormalDerivative) {
  const Vector mu{{0.1, -0.5}}, sd{{0.3, 2.0}};
  const auto prior = PriorSpec::cw_lognormal(mu, sd);
  const Vector xi{{1.7, 0.4}};
  const auto h = prior_hessian(prior, xi);
  for (Eigen::Index k = 0; k < 2; ++k) {
    const Matrix fd = oracle::partial([&](const Vector& x) { return prior_hessian(prior, x).h; }, xi, k, 1e-6);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) EXPECT_NEAR(h.dh(k, i, j), fd(i, j), 1e-7);
  }
}

TEST(PriorHessian, UniformBoundary) {
  const auto u = PriorSpec::uniform(Vector::Zero(2), Vector::Ones(2));
  EXPECT_THROW(prior_hessian(u, Vector{{0.0, 0.5}}), BoundaryError);
  EXPECT_THROW(prior_hessian(u, Vector{{0.5, 1.0}}), BoundaryError);
  EXPECT_THROW(prior_hessian(u, Vector{{0.5, 1.5}}), OutOfSupportError);
}

TEST(Regularize, Ladder) {
  auto r = regularize(Matrix::Identity(3, 3));
  EXPECT_EQ(r.jitter, 0.0);
  EXPECT_FALSE(r.singular);
  EXPECT_EQ(r.matrix, Matrix::Identity(3, 3));

  r = regularize(Matrix::Zero(3, 3));
  EXPECT_TRUE(r.singular);
  EXPECT_EQ(r.jitter, 1e-12);
  EXPECT_NEAR((r.matrix - 1e-12 * Matrix::Identity(3, 3)).norm(), 0.0, 1e-30);

  r = regularize(Vector{{1.0, 1e-16}}.asDiagonal().toDenseMatrix());
  EXPECT_TRUE(r.singular);
  EXPECT_GT(r.jitter, 0.0);
  EXPECT_NEAR((r.lower * r.lower.transpose() - r.matrix).norm(), 0.0, 1e-14);

  EXPECT_THROW(regularize(Vector{{1.0, -1.0}}.asDiagonal().toDenseMatrix()), SingularMetricError);
  EXPECT_THROW(regularize(Matrix(2, 3)), ShapeError);
}

TEST(FisherMetric, HandContraction) {
  // two species, one time, S_{i,d} = delta_id, sigma = 2
  SensitivityState s({1.0}, 2, 2, 1);
  s.S(0, 0, 0) = 1.0;
  s.S(0, 1, 1) = 1.0;
  const auto mb = fisher_metric(1.0, s, NoiseModel::normal(Vector{{2.0, 2.0}}),
                                PriorSpec::uniform(Vector::Constant(2, -1), Vector::Constant(2, 1)),
                                Vector::Zero(2));
  EXPECT_NEAR((mb.g - 0.25 * Matrix::Identity(2, 2)).norm(), 0.0, 1e-15);
}

TEST(FisherMetric, PhiZeroIsPriorHessian) {
  const Vector xi{{0.2, 0.2, 3.0}};
  const auto sens = integrate_with_sensitivities(*fitzhugh_nagumo_system(), kFnX0, xi,
                                                 equally_spaced_times(0, 10, 25), 2);
  const auto noise = NoiseModel::normal(Vector::Constant(2, std::sqrt(0.05)));
  auto mb = fisher_metric(0.0, sens, noise, fn_prior(), xi);
  EXPECT_EQ(mb.g, prior_hessian(fn_prior(), xi).h);

  const auto uni = PriorSpec::uniform(Vector::Zero(3), Vector{{1, 1, 7}});
  mb = fisher_metric(0.0, sens, noise, uni, xi);
  EXPECT_TRUE((mb.g.array() == 0.0).all());
  EXPECT_TRUE(regularize(mb.g).singular);
}

TEST(FisherMetric, PositiveDefiniteUnderNormalPrior) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto fn = fitzhugh_nagumo_system();
  const auto lv = lotka_volterra_system();
  const auto lv_prior = PriorSpec::mvn(Vector{{8, 0.5, 0.2, 0.01}},
                                       Vector{{4, 0.01, 0.0025, 0.000016}}.asDiagonal().toDenseMatrix());
  const auto times = equally_spaced_times(0, 10, 20);
  for (int k = 0; k < 50; ++k) {
    Vector xi = random_fn(rng);
    auto s = integrate_with_sensitivities(*fn, kFnX0, xi, times, 1);
    auto g = fisher_metric(u(rng), s, NoiseModel::normal(Vector::Constant(2, 0.2)), fn_prior(), xi).g;
    EXPECT_NEAR((g - g.transpose()).norm(), 0.0, 1e-12 * g.norm());
    EXPECT_EQ(regularize(g).jitter, 0.0);

    xi = random_lv(rng);
    s = integrate_with_sensitivities(*lv, kLvX0, xi, times, 1);
    g = fisher_metric(u(rng), s, NoiseModel::normal(Vector::Constant(2, 0.6)), lv_prior, xi).g;
    EXPECT_EQ(regularize(g).jitter, 0.0);
  }
}

TEST(FisherMetric, MonotoneInPhi) {
  std::mt19937_64 rng(2);
  const auto times = equally_spaced_times(0, 10, 25);
  for (int k = 0; k < 20; ++k) {
    const Vector xi = random_fn(rng);
    const auto s = integrate_with_sensitivities(*fitzhugh_nagumo_system(), kFnX0, xi, times, 1);
    const auto noise = NoiseModel::normal(Vector::Constant(2, 0.3));
    const Matrix d = fisher_metric(0.7, s, noise, fn_prior(), xi).g -
                     fisher_metric(0.2, s, noise, fn_prior(), xi).g;
    Eigen::SelfAdjointEigenSolver<Matrix> es(d);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * es.eigenvalues().cwiseAbs().maxCoeff());
  }
}

TEST(FisherMetric, DerivativeMatchesFiniteDifferences) {
  std::mt19937_64 rng(3);
  const auto times = equally_spaced_times(0, 10, 25);
  const auto noise = NoiseModel::normal(Vector::Constant(2, std::sqrt(0.05)));
  for (int k = 0; k < 5; ++k) {
    const Vector xi = random_fn(rng);
    auto metric = [&](const Vector& x, int order) {
      const auto s = integrate_with_sensitivities(*fitzhugh_nagumo_system(), kFnX0, x, times, order, tight());
      return fisher_metric(0.6, s, noise, fn_prior(), x);
    };
    EXPECT_LT(metric_derivative_error(metric, xi), 1e-4) << xi.transpose();
  }
  const auto lv_noise = NoiseModel::normal(Vector::Constant(2, std::sqrt(0.4)));
  const auto lv_prior = PriorSpec::cw_lognormal(Vector{{2.0, -0.7, -1.6, -4.6}}, Vector::Constant(4, 0.5));
  for (int k = 0; k < 3; ++k) {
    const Vector xi = random_lv(rng);
    auto metric = [&](const Vector& x, int order) {
      const auto s = integrate_with_sensitivities(*lotka_volterra_system(), kLvX0, x, times, order, tight());
      return fisher_metric(1.0, s, lv_noise, lv_prior, x);
    };
    EXPECT_LT(metric_derivative_error(metric, xi), 1e-4) << xi.transpose();
  }
}

TEST(FisherMetric, LognormalNoiseUsesLogStates) {
  const Vector xi{{8, 0.5, 0.2, 0.01}};
  const auto times = equally_spaced_times(0, 10, 20);
  const auto s = integrate_with_sensitivities(*lotka_volterra_system(), kLvX0, xi, times, 1);
  const auto g = likelihood_metric(s, NoiseModel::lognormal(Vector::Constant(2, 0.5)), false).G;
  Matrix ref = Matrix::Zero(4, 4);
  for (std::size_t t = 0; t < times.size(); ++t)
    for (std::size_t d = 0; d < 2; ++d) {
      Vector row(4);
      for (std::size_t i = 0; i < 4; ++i) row[i] = s.S(t, i, d) / s.X(t, d);
      ref += row * row.transpose() / 0.25;
    }
  EXPECT_LT((g - ref).norm() / ref.norm(), 1e-13);
}

TEST(ExtendedMetric, ReducesToNormalMetric) {
  const Vector xi{{0.2, 0.2, 3.0}};
  const auto times = equally_spaced_times(0, 10, 25);
  const auto s = integrate_with_sensitivities(*fitzhugh_nagumo_system(), kFnX0, xi, times, 3);
  const auto plain = NoiseModel::normal(Vector::Constant(2, 0.3));
  const auto a = fisher_metric(1.0, s, plain, fn_prior(), xi);
  const auto b = fisher_metric_extended(1.0, s, plain, fn_prior(), xi);
  EXPECT_LT((a.g - b.g).cwiseAbs().maxCoeff(), 1e-12 * a.g.norm());

  auto far = plain;
  far.hetero_sigma = Vector::Zero(2);
  far.lower_bound = -1e10 * 0.3;
  const auto c = fisher_metric_extended(1.0, s, far, fn_prior(), xi);
  EXPECT_LT((a.g - c.g).cwiseAbs().maxCoeff(), 1e-8);
  for (std::size_t i = 0; i < a.dg.size(); ++i) EXPECT_NEAR(a.dg.data()[i], c.dg.data()[i], 1e-8);
}

TEST(ExtendedMetric, HeteroscedasticMatchesTermByTermForm) {
  // g_ij = sum S_i S_j / K + (1/2) K d_i d_j(1/K), with K = s^2 + h^2 X^2
  const Vector xi{{0.25, 0.3, 2.5}};
  const auto times = equally_spaced_times(0, 10, 25);
  const auto s = integrate_with_sensitivities(*fitzhugh_nagumo_system(), kFnX0, xi, times, 2);
  auto noise = NoiseModel::normal(Vector::Constant(2, 0.3));
  noise.hetero_sigma = Vector{{0.1, 0.2}};
  const Matrix g = extended_likelihood_metric(s, noise, false).G;
  Matrix ref = Matrix::Zero(3, 3);
  for (std::size_t t = 0; t < times.size(); ++t)
    for (std::size_t d = 0; d < 2; ++d) {
      const double s2 = 0.09, h2 = noise.hetero_sigma[d] * noise.hetero_sigma[d], X = s.X(t, d);
      const double K = s2 + h2 * X * X;
      for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) {
          const double Ki = 2 * h2 * X * s.S(t, i, d), Kj = 2 * h2 * X * s.S(t, j, d);
          const double Kij = 2 * h2 * (s.S(t, i, d) * s.S(t, j, d) + X * s.dS(t, i, j, d));
          const double d2inv = 2 * Ki * Kj / (K * K * K) - Kij / (K * K);
          ref(i, j) += s.S(t, i, d) * s.S(t, j, d) / K + 0.5 * K * d2inv;
        }
    }
  EXPECT_LT((g - ref).cwiseAbs().maxCoeff() / ref.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(ExtendedMetric, DerivativeMatchesFiniteDifferences) {
  const auto times = equally_spaced_times(0, 10, 25);
  auto noise = NoiseModel::normal(Vector::Constant(2, 0.3));
  noise.hetero_sigma = Vector{{0.1, 0.05}};
  noise.lower_bound = -2.5;
  std::mt19937_64 rng(4);
  for (int k = 0; k < 3; ++k) {
    const Vector xi = random_fn(rng);
    auto metric = [&](const Vector& x, int order) {
      const auto s = integrate_with_sensitivities(*fitzhugh_nagumo_system(), kFnX0, x, times, order + 1, tight());
      return fisher_metric_extended(0.8, s, noise, fn_prior(), x);
    };
    EXPECT_LT(metric_derivative_error(metric, xi), 1e-4) << xi.transpose();
  }
}

TEST(ExtendedMetric, DeepTruncationIsDegenerate) {
  SensitivityState s({1.0}, 1, 1, 2);
  s.X(0, 0) = -100.0;
  s.S(0, 0, 0) = 1.0;
  auto noise = NoiseModel::normal(Vector{{1.0}});
  noise.lower_bound = 0.0;
  EXPECT_THROW(extended_likelihood_metric(s, noise, false), NumericalDegeneracyError);
}

TEST(Truncation, TermsAtTheBound) {
  SensitivityState s({1.0, 2.0}, 1, 1, 1);
  s.X(0, 0) = 0.5;
  s.X(1, 0) = 3.0;
  auto noise = NoiseModel::normal(Vector{{0.5}});
  noise.hetero_sigma = Vector{{0.2}};
  noise.lower_bound = 0.5;
  const auto t = truncation_terms(noise, s, 0);
  EXPECT_NEAR(t.alpha[0], 0.0, 1e-15);
  EXPECT_NEAR(t.lambda[0], std::sqrt(2 / std::numbers::pi), 1e-15);
  EXPECT_NEAR(t.J[0], t.K[0], 1e-15);
  for (int i = 0; i < 2; ++i) {
    EXPECT_GT(t.lambda[i], 0.0);
    EXPECT_GT(t.J[i], 0.0);
    EXPECT_LE(t.J[i], t.K[i]);
  }
}

TEST(Truncation, MomentsMatchQuadrature) {
  struct C {
    double mu, sigma, a, b;
  };
  const C cases[] = {{0, 1, 0, kInf},    {0, 1, -1, 1},     {2, 0.5, 1.0, 4.0}, {0, 1, 3, kInf},
                     {-1, 2, -kInf, 0.5}, {0, 1, -8, -6.5}, {5, 3, 0, 1e300}};
  for (const auto& c : cases) {
    const auto m = truncated_normal_moments(c.mu, c.sigma, c.a, c.b);
    // integrate over the bounded part of the support that carries mass
    const double lo = std::max(c.a, c.mu - 40 * c.sigma), hi = std::min(c.b, c.mu + 40 * c.sigma);
    auto pdf = [&](double x) { return oracle::normal_pdf(x, c.mu, c.sigma); };
    const double z = oracle::integrate(pdf, lo, hi, 400);
    const double m1 = oracle::integrate([&](double x) { return x * pdf(x); }, lo, hi, 400) / z;
    const double m2 = oracle::integrate([&](double x) { return (x - m1) * (x - m1) * pdf(x); }, lo, hi, 400) / z;
    // symmetric intervals have mean 0, so scale by sigma as well
    EXPECT_LT(std::abs(m.mean - m1) / std::max(std::abs(m1), c.sigma), 1e-8) << c.a << ' ' << c.b;
    EXPECT_LT(std::abs(m.variance - m2) / m2, 1e-8) << c.a << ' ' << c.b;
  }
  const auto half = truncated_normal_moments(0, 1, 0, kInf);
  EXPECT_NEAR(half.mean, 0.79788, 5e-6);
  EXPECT_NEAR(half.variance, 0.36338, 5e-6);
  const auto none = truncated_normal_moments(1.5, 2.0, -kInf, kInf);
  EXPECT_NEAR(none.mean, 1.5, 1e-15);
  EXPECT_NEAR(none.variance, 4.0, 1e-14);
  EXPECT_NEAR(truncated_normal_moments(0, 1, -2, 2).mean, 0.0, 1e-16);
  EXPECT_THROW(truncated_normal_moments(0, 1, 60, 61), DomainError);
}

TEST(Noise, Validation) {
  auto n = NoiseModel::lognormal(Vector::Ones(2));
  n.lower_bound = 0.0;
  EXPECT_THROW(n.validate(2), ConfigurationError);
  EXPECT_THROW(NoiseModel::normal(Vector{{1.0, -1.0}}).validate(2), ConfigurationError);
  EXPECT_THROW(NoiseModel::normal(Vector{{1.0}}).validate(2), ShapeError);
}
