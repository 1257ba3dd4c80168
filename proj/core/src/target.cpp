#include "igsmc/target.hpp"

#include <cmath>

#include "igsmc/errors.hpp"
#include "igsmc/normal.hpp"

namespace igsmc {

double TargetSequence::log_incremental(std::size_t a, const PointEvaluation& e) const {
  if (a == 0) throw ConfigurationError("incremental weight needs a >= 1");
  if (!e.usable()) return kNegInf;
  const double hi = log_gamma(a, e);
  const double lo = log_gamma(a - 1, e);
  if (hi == kNegInf) return kNegInf;
  if (lo == kNegInf) return kInf;
  return hi - lo;
}

std::vector<std::string> TargetSequence::parameter_names() const {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < dim(); ++i) names.push_back("xi" + std::to_string(i + 1));
  return names;
}

double TargetSequence::phi(std::size_t a) const {
  const std::size_t p = length();
  return p > 1 ? static_cast<double>(a) / static_cast<double>(p - 1) : 1.0;
}

TemperedSequence::TemperedSequence(std::shared_ptr<const TemperedModel> model,
                                   TemperingSchedule schedule)
    : model_(std::move(model)), schedule_(std::move(schedule)) {
  if (!model_) throw ConfigurationError("tempered sequence needs a model");
  if (schedule_.size() < 2) throw ConfigurationError("tempered sequence needs >= 2 exponents");
}

double TemperedSequence::log_gamma(std::size_t a, const PointEvaluation& e) const {
  return tempered_log_density(e, schedule_[a]);
}

Vector TemperedSequence::grad_log_gamma(std::size_t a, const PointEvaluation& e) const {
  return tempered_gradient(e, schedule_[a]);
}

MetricBundle TemperedSequence::metric(std::size_t a, const PointEvaluation& e) const {
  return tempered_metric(e, schedule_[a]);
}

double TemperedSequence::log_incremental(std::size_t a, const PointEvaluation& e) const {
  if (a == 0 || a >= schedule_.size()) throw ConfigurationError("incremental index out of range");
  if (!e.usable()) return kNegInf;
  const double dphi = schedule_[a] - schedule_[a - 1];
  if (dphi == 0.0) return 0.0;
  return dphi * e.log_likelihood;
}

GaussianPathSequence::GaussianPathSequence(std::vector<Gaussian1d> path) : path_(std::move(path)) {
  if (path_.size() < 2) throw ConfigurationError("Gaussian path needs >= 2 points");
  for (const auto& p : path_)
    if (!(p.var > 0.0)) throw DomainError("Gaussian path variance must be positive");
}

PointEvaluation GaussianPathSequence::evaluate(const Vector& xi, EvalLevel level) const {
  if (xi.size() != 1) throw ShapeError("Gaussian path targets are one-dimensional");
  PointEvaluation e;
  e.xi = xi;
  e.level = level;
  e.in_support = std::isfinite(xi[0]);
  return e;
}

double GaussianPathSequence::log_gamma(std::size_t a, const PointEvaluation& e) const {
  if (!e.usable()) return kNegInf;
  const auto& p = path_.at(a);
  const double sd = std::sqrt(p.var);
  return normal::log_pdf((e.xi[0] - p.mean) / sd) - std::log(sd);
}

Vector GaussianPathSequence::grad_log_gamma(std::size_t a, const PointEvaluation& e) const {
  const auto& p = path_.at(a);
  return Vector::Constant(1, -(e.xi[0] - p.mean) / p.var);
}

MetricBundle GaussianPathSequence::metric(std::size_t a, const PointEvaluation&) const {
  MetricBundle mb;
  mb.g = Matrix::Constant(1, 1, 1.0 / path_.at(a).var);
  mb.dg = Tensor3(1, 1, 1);
  mb.has_dg = true;
  return mb;
}

}  // namespace igsmc
