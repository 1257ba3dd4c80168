#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "igsmc/proposal.hpp"
#include "igsmc/types.hpp"

namespace igsmc {

/// Fisher metric and its coordinate derivatives, dg(k, i, j) = d_k g_ij.
struct MetricBundle {
  Matrix g;
  Tensor3 dg;
  bool has_dg = false;
};

/// How much of the local geometry an evaluation must provide.
enum class EvalLevel { kValue = 0, kGradient = 1, kMetric = 2, kMetricDerivative = 3 };

/// Tempering-independent pieces of a model evaluated at one point. The
/// tempered quantities at any exponent are assembled from these, so one
/// (possibly expensive) evaluation serves every population.
struct PointEvaluation {
  Vector xi;
  EvalLevel level = EvalLevel::kValue;
  bool in_support = false;
  // Set when the point is in the prior support but the likelihood could not
  // be computed (e.g. the ODE solver failed). Treated as zero density.
  bool failed = false;
  std::string failure;

  double log_prior = kNegInf;
  double log_likelihood = kNegInf;
  Vector grad_log_prior;
  Vector grad_log_likelihood;
  Matrix prior_hessian;
  Tensor3 prior_hessian_derivative;
  Matrix likelihood_metric;
  Tensor3 likelihood_metric_derivative;

  bool usable() const { return in_support && !failed; }
};

/// log prior + phi * log likelihood, -inf outside the support.
double tempered_log_density(const PointEvaluation& e, double phi);
Vector tempered_gradient(const PointEvaluation& e, double phi);
/// g = phi * G_lik + h and, when available, dg = phi * dG_lik + dh.
MetricBundle tempered_metric(const PointEvaluation& e, double phi);

/// A prior times a likelihood raised to a tempering exponent.
class TemperedModel {
 public:
  virtual ~TemperedModel() = default;

  virtual std::size_t dim() const = 0;
  virtual bool support_check(const Vector& xi) const = 0;
  /// Evaluates everything up to `level`. Never throws for points outside
  /// the support; those come back with in_support = false.
  virtual PointEvaluation evaluate(const Vector& xi, EvalLevel level) const = 0;
  virtual std::vector<std::string> parameter_names() const;

  double log_gamma(const Vector& xi, double phi) const;
  Vector grad_log_gamma(const Vector& xi, double phi) const;
  /// Throws OutOfSupportError outside the support.
  MetricBundle metric_bundle(const Vector& xi, double phi, bool with_derivative = true) const;
};

struct UnivariatePrior {
  double u1 = 50.0;  // prior mean of mu
  double v1 = 20.0;  // prior sd of mu
  double u2 = 10.0;  // prior mean of sigma
  double v2 = 2.5;   // prior sd of sigma
};

/// Normal observations with unknown (mu, sigma) and independent normal
/// priors on each coordinate; sigma > 0 is a hard support constraint.
class UnivariateGaussianModel final : public TemperedModel {
 public:
  UnivariateGaussianModel(std::vector<double> data, UnivariatePrior prior);

  std::size_t dim() const override { return 2; }
  bool support_check(const Vector& xi) const override;
  PointEvaluation evaluate(const Vector& xi, EvalLevel level) const override;
  std::vector<std::string> parameter_names() const override { return {"mu", "sigma"}; }

  const std::vector<double>& data() const { return data_; }
  const UnivariatePrior& prior() const { return prior_; }
  std::size_t sample_size() const { return data_.size(); }

 private:
  std::vector<double> data_;
  UnivariatePrior prior_;
};

double uni_log_gamma(const UnivariateGaussianModel& model, const Vector& xi, double phi);
MetricBundle uni_metric(const UnivariateGaussianModel& model, const Vector& xi, double phi);

/// Closed-form mMALA proposal for the univariate model:
/// mean = xi + drift, covariance = eps^2 g^{-1}.
KernelProposal uni_drift_cov(const UnivariateGaussianModel& model, const Vector& xi, double phi,
                             double epsilon, DriftForm form = kDefaultDriftForm);

}  // namespace igsmc
