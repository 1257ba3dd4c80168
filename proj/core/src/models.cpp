#include "igsmc/models.hpp"

#include <cmath>
#include <numbers>

#include "igsmc/errors.hpp"
#include "igsmc/normal.hpp"

namespace igsmc {

double tempered_log_density(const PointEvaluation& e, double phi) {
  if (!e.usable()) return kNegInf;
  if (phi == 0.0) return e.log_prior;
  return e.log_prior + phi * e.log_likelihood;
}

Vector tempered_gradient(const PointEvaluation& e, double phi) {
  if (e.level < EvalLevel::kGradient) throw CapabilityError("evaluation lacks gradients");
  if (!e.usable()) throw OutOfSupportError("gradient requested outside the support");
  return e.grad_log_prior + phi * e.grad_log_likelihood;
}

MetricBundle tempered_metric(const PointEvaluation& e, double phi) {
  if (e.level < EvalLevel::kMetric) throw CapabilityError("evaluation lacks a metric");
  if (!e.usable()) throw OutOfSupportError("metric requested outside the support");
  MetricBundle mb;
  mb.g = phi * e.likelihood_metric + e.prior_hessian;
  if (e.level >= EvalLevel::kMetricDerivative) {
    mb.dg = e.likelihood_metric_derivative;
    mb.dg *= phi;
    mb.dg += e.prior_hessian_derivative;
    mb.has_dg = true;
  }
  return mb;
}

std::vector<std::string> TemperedModel::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < dim(); ++i) names.push_back("xi" + std::to_string(i + 1));
  return names;
}

double TemperedModel::log_gamma(const Vector& xi, double phi) const {
  return tempered_log_density(evaluate(xi, EvalLevel::kValue), phi);
}

Vector TemperedModel::grad_log_gamma(const Vector& xi, double phi) const {
  return tempered_gradient(evaluate(xi, EvalLevel::kGradient), phi);
}

MetricBundle TemperedModel::metric_bundle(const Vector& xi, double phi, bool with_derivative) const {
  const auto e = evaluate(xi, with_derivative ? EvalLevel::kMetricDerivative : EvalLevel::kMetric);
  if (!e.in_support) throw OutOfSupportError("metric requested outside the support");
  return tempered_metric(e, phi);
}

UnivariateGaussianModel::UnivariateGaussianModel(std::vector<double> data, UnivariatePrior prior)
    : data_(std::move(data)), prior_(prior) {
  if (!(prior_.v1 > 0.0) || !(prior_.v2 > 0.0))
    throw ConfigurationError("prior standard deviations must be positive");
}

bool UnivariateGaussianModel::support_check(const Vector& xi) const {
  return xi.size() == 2 && xi.allFinite() && xi[1] > 0.0;
}

PointEvaluation UnivariateGaussianModel::evaluate(const Vector& xi, EvalLevel level) const {
  PointEvaluation e;
  e.xi = xi;
  e.level = level;
  if (xi.size() != 2) throw ShapeError("univariate model expects 2 coordinates");
  e.in_support = support_check(xi);
  if (!e.in_support) return e;

  const double mu = xi[0];
  const double sigma = xi[1];
  const auto& p = prior_;
  const double s = static_cast<double>(data_.size());

  double resid = 0.0;
  double resid_sq = 0.0;
  for (double x : data_) {
    resid += x - mu;
    resid_sq += (x - mu) * (x - mu);
  }
  e.log_prior = normal::log_pdf((mu - p.u1) / p.v1) - std::log(p.v1) +
                normal::log_pdf((sigma - p.u2) / p.v2) - std::log(p.v2);
  e.log_likelihood = -0.5 * s * std::log(2.0 * std::numbers::pi) - s * std::log(sigma) -
                     0.5 * resid_sq / (sigma * sigma);
  if (level < EvalLevel::kGradient) return e;

  const double s2 = sigma * sigma;
  const double s3 = s2 * sigma;
  e.grad_log_prior = Vector{{-(mu - p.u1) / (p.v1 * p.v1), -(sigma - p.u2) / (p.v2 * p.v2)}};
  e.grad_log_likelihood = Vector{{resid / s2, -s / sigma + resid_sq / s3}};
  if (level < EvalLevel::kMetric) return e;

  e.prior_hessian = Matrix::Zero(2, 2);
  e.prior_hessian(0, 0) = 1.0 / (p.v1 * p.v1);
  e.prior_hessian(1, 1) = 1.0 / (p.v2 * p.v2);
  e.likelihood_metric = Matrix::Zero(2, 2);
  e.likelihood_metric(0, 0) = s / s2;
  e.likelihood_metric(1, 1) = 2.0 * s / s2;
  if (level < EvalLevel::kMetricDerivative) return e;

  e.prior_hessian_derivative = Tensor3(2, 2, 2);
  e.likelihood_metric_derivative = Tensor3(2, 2, 2);
  e.likelihood_metric_derivative(1, 0, 0) = -2.0 * s / s3;
  e.likelihood_metric_derivative(1, 1, 1) = -4.0 * s / s3;
  return e;
}

double uni_log_gamma(const UnivariateGaussianModel& model, const Vector& xi, double phi) {
  return model.log_gamma(xi, phi);
}

MetricBundle uni_metric(const UnivariateGaussianModel& model, const Vector& xi, double phi) {
  return model.metric_bundle(xi, phi, true);
}

KernelProposal uni_drift_cov(const UnivariateGaussianModel& model, const Vector& xi, double phi,
                             double epsilon, DriftForm form) {
  if (!model.support_check(xi)) throw OutOfSupportError("drift requested outside the support");
  if (!(epsilon >= 0.0)) throw ConfigurationError("step size must be non-negative");
  const auto& p = model.prior();
  const double s = static_cast<double>(model.sample_size());
  const double mu = xi[0];
  const double sigma = xi[1];
  const double s2 = sigma * sigma;
  const double c1 = s2 + p.v1 * p.v1 * s * phi;
  const double c2 = s2 + 2.0 * p.v2 * p.v2 * s * phi;
  const double eps2 = epsilon * epsilon;

  double resid = 0.0;
  double resid_sq = 0.0;
  for (double x : model.data()) {
    resid += x - mu;
    resid_sq += (x - mu) * (x - mu);
  }
  const double inv_g_mu = p.v1 * p.v1 * s2 / c1;
  const double inv_g_sigma = p.v2 * p.v2 * s2 / c2;
  const double score_mu = -(mu - p.u1) / (p.v1 * p.v1) + phi * resid / s2;
  const double score_sigma =
      -(sigma - p.u2) / (p.v2 * p.v2) - s * phi / sigma + phi * resid_sq / (s2 * sigma);
  // Metric-derivative correction; the Christoffel contraction is half of the
  // three-term form for this diagonal metric.
  const double correction = (2.0 * s * phi / sigma) *
                            (2.0 * p.v2 * p.v2 / c2 - p.v1 * p.v1 / c1) *
                            (form == DriftForm::kPrinted ? 1.0 : 0.5);

  Vector mean{{mu + 0.5 * eps2 * inv_g_mu * score_mu,
               sigma + 0.5 * eps2 * inv_g_sigma * (score_sigma + correction)}};
  Matrix cov = Matrix::Zero(2, 2);
  cov(0, 0) = eps2 * inv_g_mu;
  cov(1, 1) = eps2 * inv_g_sigma;
  return KernelProposal(std::move(mean), cov);
}

}  // namespace igsmc
