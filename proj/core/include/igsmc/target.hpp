#pragma once

#include <cstddef>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "igsmc/core.hpp"
#include "igsmc/models.hpp"

namespace igsmc {

struct Gaussian1d {
  double mean = 0.0;
  double var = 1.0;
};

/// A sequence of unnormalised densities gamma_1, ..., gamma_p on a common
/// space. Indices are 0-based. A PointEvaluation is index-independent, so
/// one evaluation per point serves the whole sequence.
class TargetSequence {
 public:
  virtual ~TargetSequence() = default;

  virtual std::size_t length() const = 0;
  virtual std::size_t dim() const = 0;
  virtual PointEvaluation evaluate(const Vector& xi, EvalLevel level) const = 0;

  virtual double log_gamma(std::size_t a, const PointEvaluation& e) const = 0;
  virtual Vector grad_log_gamma(std::size_t a, const PointEvaluation& e) const = 0;
  virtual MetricBundle metric(std::size_t a, const PointEvaluation& e) const = 0;

  /// log gamma_a - log gamma_{a-1} at the same point.
  virtual double log_incremental(std::size_t a, const PointEvaluation& e) const;

  /// Set for sequences of one-dimensional Gaussians; required by kernels
  /// whose transition density is only known in closed form there.
  virtual std::optional<Gaussian1d> gaussian_1d(std::size_t) const { return std::nullopt; }

  virtual std::vector<std::string> parameter_names() const;

  /// Position of target `a` along the sequence, reported in diagnostics.
  /// Tempered sequences return their exponent; others a / (p - 1).
  virtual double phi(std::size_t a) const;
};

/// prior * likelihood^phi_a over a tempering schedule.
class TemperedSequence final : public TargetSequence {
 public:
  TemperedSequence(std::shared_ptr<const TemperedModel> model, TemperingSchedule schedule);

  std::size_t length() const override { return schedule_.size(); }
  std::size_t dim() const override { return model_->dim(); }
  PointEvaluation evaluate(const Vector& xi, EvalLevel level) const override {
    return model_->evaluate(xi, level);
  }
  double log_gamma(std::size_t a, const PointEvaluation& e) const override;
  Vector grad_log_gamma(std::size_t a, const PointEvaluation& e) const override;
  MetricBundle metric(std::size_t a, const PointEvaluation& e) const override;
  /// (phi_a - phi_{a-1}) * log L, which avoids differencing two large numbers.
  double log_incremental(std::size_t a, const PointEvaluation& e) const override;
  std::vector<std::string> parameter_names() const override { return model_->parameter_names(); }
  double phi(std::size_t a) const override { return schedule_[a]; }

  const TemperingSchedule& schedule() const { return schedule_; }
  const TemperedModel& model() const { return *model_; }

 private:
  std::shared_ptr<const TemperedModel> model_;
  TemperingSchedule schedule_;
};

/// A path of univariate normal distributions N(mean_a, var_a), with the
/// Fisher metric of the location family, 1 / var_a, as the kernel geometry.
class GaussianPathSequence final : public TargetSequence {
 public:
  explicit GaussianPathSequence(std::vector<Gaussian1d> path);

  std::size_t length() const override { return path_.size(); }
  std::size_t dim() const override { return 1; }
  PointEvaluation evaluate(const Vector& xi, EvalLevel level) const override;
  double log_gamma(std::size_t a, const PointEvaluation& e) const override;
  Vector grad_log_gamma(std::size_t a, const PointEvaluation& e) const override;
  MetricBundle metric(std::size_t a, const PointEvaluation& e) const override;
  std::optional<Gaussian1d> gaussian_1d(std::size_t a) const override { return path_.at(a); }
  std::vector<std::string> parameter_names() const override { return {"x"}; }

 private:
  std::vector<Gaussian1d> path_;
};

}  // namespace igsmc
