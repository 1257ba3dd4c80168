#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "igsmc/core.hpp"
#include "igsmc/kernels.hpp"
#include "igsmc/target.hpp"

namespace igsmc {

enum class WeightMode {
  kSimple,      // gamma_a / gamma_{a-1} at the pre-move position
  kFullKernel,  // gamma_a(new) over the kernel-smoothed previous population
};

/// Particle approximation of the full-kernel denominator.
enum class FullWeightApprox {
  /// sum_n W^n K(new_n | old_n): one shared denominator, used as an
  /// incremental factor on the previous weights.
  kPaired,
  /// sum_m W^m K(new_n | old_m) per particle, used as the whole weight
  /// (marginal importance sampling). O(N^2) per population.
  kMarginalMixture,
};

struct SmcConfig {
  std::size_t particles = 1000;
  double ess_fraction = 0.3;
  std::size_t mcmc_steps = 1;
  WeightMode weight_mode = WeightMode::kSimple;
  FullWeightApprox full_weight_approx = FullWeightApprox::kPaired;
  bool resampling = true;
  ResampleScheme scheme = ResampleScheme::kMultinomial;
  std::uint64_t seed = 1;
  int threads = 0;  // 0: OpenMP default
  bool keep_history = false;
  KernelSpec kernel;

  void validate() const;
};

struct PopulationDiagnostics {
  std::size_t population = 0;  // 1-based
  double phi = 0.0;
  double ess = 0.0;
  double acceptance_rate = 0.0;
  bool resampled = false;
  std::size_t jitter_events = 0;
  std::size_t integration_failures = 0;
  bool zero_denominator = false;
};

struct PopulationSnapshot {
  std::size_t population = 0;  // 1-based
  std::vector<Vector> positions;
  std::vector<double> weights;
};

struct PosteriorSummary {
  Vector mean;
  Vector sd;
  Matrix covariance;
  Matrix correlation;
};

struct SmcResult {
  Population final_population;
  std::vector<PopulationDiagnostics> diagnostics;
  std::vector<PopulationSnapshot> history;
  PosteriorSummary summary;
  std::vector<std::string> parameter_names;
};

using PriorSampler = std::function<Vector(Rng&)>;

/// Runs the sampler through every target of `seq`. The first target must be
/// the one `prior` samples from.
SmcResult run(const SmcConfig& config, const TargetSequence& seq, const PriorSampler& prior);

/// log gamma_a(xi) - log gamma_{a-1}(xi); -inf outside the support.
double incremental_weight_simple(const TargetSequence& seq, const Vector& xi_prev, std::size_t a);

struct FullWeight {
  double log_weight = kNegInf;
  bool zero_denominator = false;
};

/// log gamma_a(next_n) minus the log denominator of the chosen
/// approximation: sum_m W^m K_a(next_m | prev_m) for kPaired (the same for
/// every n), sum_m W^m K_a(next_n | prev_m) for kMarginalMixture. Needs a
/// one-dimensional Gaussian target and the uniform random walk of `width`.
FullWeight incremental_weight_full(const TargetSequence& seq, std::span<const Vector> prev,
                                   std::span<const double> prev_weights,
                                   std::span<const Vector> next, std::size_t n, std::size_t a,
                                   double width, FullWeightApprox approx);

PosteriorSummary summarize(std::span<const Vector> positions, std::span<const double> weights);
PosteriorSummary summarize(const Population& pop);

/// Deterministic drift iteration: each step moves every particle to the
/// mean of its mMALA proposal under the next target, with no noise,
/// acceptance step or weighting.
struct DriftPath {
  std::vector<Vector> points;  // points[0] is the start
  bool truncated = false;
  std::string reason;
};

std::vector<DriftPath> drift_paths(const TargetSequence& seq, std::span<const Vector> starts,
                                   const KernelSpec& kernel);

}  // namespace igsmc
