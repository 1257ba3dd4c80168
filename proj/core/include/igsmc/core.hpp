#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "igsmc/rng.hpp"
#include "igsmc/types.hpp"

namespace igsmc {

/// Coordinates of a point on the parameter manifold.
using ParameterPoint = Vector;

/// Tempering exponents phi_1 = 0 < phi_2 < ... < phi_p = 1.
struct TemperingSchedule {
  std::vector<double> phis;
  double phi2_anchor = 0.0;

  /// Geometric ladder: phi_a = phi2^(1 - (a-2)/(p-2)) for a >= 2 (1-based),
  /// so successive ratios are constant from the second exponent onward.
  static TemperingSchedule geometric(std::size_t p, double phi2);

  /// A schedule that repeats one exponent; used for stationarity checks.
  static TemperingSchedule constant(std::size_t p, double phi);

  std::size_t size() const { return phis.size(); }
  double operator[](std::size_t a) const { return phis[a]; }
};

struct Particle {
  ParameterPoint position;
  double log_weight = 0.0;
};

struct Population {
  std::vector<Particle> particles;
  std::size_t temper_index = 0;
  double ess = 0.0;
  double acceptance_rate = 0.0;

  std::size_t size() const { return particles.size(); }
  std::vector<double> weights() const;
};

struct NormalizedWeights {
  std::vector<double> weights;
  double log_normalizer = 0.0;
};

/// Max-shifted softmax. Throws DegeneratePopulationError if every entry is -inf.
NormalizedWeights normalize_weights(std::span<const double> log_weights);

/// 1 / sum w^2 for normalized weights.
double ess(std::span<const double> weights);

enum class ResampleScheme { kMultinomial, kSystematic };

/// Ancestor indices, N draws with replacement proportional to weights.
std::vector<std::size_t> resample_indices(std::span<const double> weights, Rng& rng,
                                          ResampleScheme scheme = ResampleScheme::kMultinomial);

Population multinomial_resample(const Population& pop, Rng& rng);
Population systematic_resample(const Population& pop, Rng& rng);

}  // namespace igsmc
