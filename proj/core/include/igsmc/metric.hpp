#pragma once

#include <cstddef>

#include "igsmc/models.hpp"
#include "igsmc/ode.hpp"
#include "igsmc/regularize.hpp"
#include "igsmc/rng.hpp"
#include "igsmc/types.hpp"

namespace igsmc {

enum class NoiseKind { kNormal, kLognormal };

/// Independent observation noise per species d, with variance
/// sigma_d^2 + hetero_sigma_d^2 X^2 and an optional lower truncation bound.
struct NoiseModel {
  NoiseKind kind = NoiseKind::kNormal;
  Vector sigma;
  Vector hetero_sigma;  // empty means zero
  double lower_bound = kNegInf;

  static NoiseModel normal(Vector sigma);
  static NoiseModel lognormal(Vector sigma);

  bool heteroscedastic() const;
  bool truncated() const { return lower_bound > kNegInf; }
  bool extended() const { return heteroscedastic() || truncated(); }
  double hetero(std::size_t d) const {
    return hetero_sigma.size() == 0 ? 0.0 : hetero_sigma[static_cast<Eigen::Index>(d)];
  }
  /// Throws ConfigurationError on invalid settings.
  void validate(std::size_t species) const;
};

enum class PriorKind { kUniform, kMvn, kCwLognormal };

struct PriorSpec {
  PriorKind kind = PriorKind::kMvn;
  Vector lower, upper;      // uniform bounds
  Vector mean;              // MVN mean
  Matrix covariance;        // MVN covariance
  Vector log_mean, log_sd;  // component-wise log-normal
  // Hard xi > 0 constraint on top of the density (not renormalized).
  bool positivity = false;

  static PriorSpec uniform(Vector lower, Vector upper);
  static PriorSpec mvn(Vector mean, Matrix covariance, bool positivity = false);
  static PriorSpec cw_lognormal(Vector log_mean, Vector log_sd);

  std::size_t dim() const;
  void validate() const;
  bool in_support(const Vector& xi) const;
  /// Log density up to the truncation constant; -inf outside the support.
  double log_density(const Vector& xi) const;
  Vector gradient(const Vector& xi) const;
  /// Rejection-samples the positivity constraint when it is set.
  Vector sample(Rng& rng) const;
};

struct PriorHessian {
  Matrix h;
  Tensor3 dh;  // dh(k, i, j) = d_k h_ij
};

/// Uniform: 0. MVN: Sigma^{-1}. Component-wise log-normal:
/// diag((1 - log xi_i + mu_i) / (xi_i sigma_i)^2).
PriorHessian prior_hessian(const PriorSpec& prior, const Vector& xi);

/// phi-free likelihood part of the metric and its derivative.
struct LikelihoodMetric {
  Matrix G;
  Tensor3 dG;
  bool has_dG = false;
};

/// Normal (or log-transformed log-normal) homoscedastic noise.
LikelihoodMetric normal_likelihood_metric(const SensitivityState& sens, const NoiseModel& noise,
                                          bool with_derivative);
/// Heteroscedastic and/or truncated normal noise. Expected Hessian of the
/// quadratic term only: the 1/2 d_i d_j log K contribution of the exact
/// Fisher information is not included.
LikelihoodMetric extended_likelihood_metric(const SensitivityState& sens, const NoiseModel& noise,
                                            bool with_derivative);
/// Dispatches on the noise model.
LikelihoodMetric likelihood_metric(const SensitivityState& sens, const NoiseModel& noise,
                                   bool with_derivative);

/// g = phi * sum_d S_d^T Sigma_d^{-1} S_d + h, with dg when sens has order >= 2.
MetricBundle fisher_metric(double phi, const SensitivityState& sens, const NoiseModel& noise,
                           const PriorSpec& prior, const Vector& xi);
MetricBundle fisher_metric_extended(double phi, const SensitivityState& sens,
                                    const NoiseModel& noise, const PriorSpec& prior,
                                    const Vector& xi);

/// Variance K, standardized distance to the bound alpha = (X - a) / sqrt(K),
/// hazard lambda(alpha) and J = K (1 - alpha lambda) for one species.
struct TruncationTerms {
  Vector K, alpha, lambda, J;
};
TruncationTerms truncation_terms(const NoiseModel& noise, const SensitivityState& sens,
                                 std::size_t species);

struct TruncatedMoments {
  double mean = 0.0;
  double variance = 0.0;
};
TruncatedMoments truncated_normal_moments(double mu, double sigma, double a, double b);

/// X -> log X with sensitivities transformed by the chain rule.
SensitivityState log_transform(const SensitivityState& sens);

}  // namespace igsmc
