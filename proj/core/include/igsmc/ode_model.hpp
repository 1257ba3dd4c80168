#pragma once

#include <memory>
#include <string>
#include <vector>

#include "igsmc/metric.hpp"
#include "igsmc/models.hpp"
#include "igsmc/ode.hpp"
#include "igsmc/rng.hpp"

namespace igsmc {

struct OdeModelConfig {
  std::shared_ptr<const OdeSystem> system;
  Vector x0;
  std::vector<double> times;
  Matrix data;  // tau x Dx observations
  NoiseModel noise;
  PriorSpec prior;
  IntegratorOptions options;
};

/// Bayesian parameter inference for an ODE observed with noise. Likelihood,
/// score and Fisher metric come from one forward-sensitivity solve of the
/// order the requested evaluation level needs.
class OdeInferenceModel final : public TemperedModel {
 public:
  explicit OdeInferenceModel(OdeModelConfig config);

  std::size_t dim() const override { return config_.system->param_dim(); }
  bool support_check(const Vector& xi) const override { return config_.prior.in_support(xi); }
  PointEvaluation evaluate(const Vector& xi, EvalLevel level) const override;
  std::vector<std::string> parameter_names() const override {
    return config_.system->param_names();
  }

  const OdeModelConfig& config() const { return config_; }
  /// Sensitivity order an evaluation at `level` needs under this noise model.
  int sensitivity_order(EvalLevel level) const;

  struct LikelihoodValue {
    double value = kNegInf;
    Vector gradient;  // empty unless requested
  };
  /// Log-likelihood (and score when sens has order >= 1 and it is requested).
  LikelihoodValue log_likelihood(const SensitivityState& sens, bool with_gradient) const;

 private:
  OdeModelConfig config_;
};

/// Noisy observations of the solution at the given times.
Matrix simulate_observations(const OdeSystem& system, const Vector& x0, const Vector& xi,
                             const std::vector<double>& times, const NoiseModel& noise, Rng& rng,
                             const IntegratorOptions& options = {});

/// n equally spaced times t0 + k (t1 - t0) / n, k = 1..n.
std::vector<double> equally_spaced_times(double t0, double t1, std::size_t n);

}  // namespace igsmc
