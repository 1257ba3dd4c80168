#include "igsmc/core.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "igsmc/errors.hpp"

namespace igsmc {

TemperingSchedule TemperingSchedule::geometric(std::size_t p, double phi2) {
  if (p < 3) throw ConfigurationError("geometric schedule needs p >= 3");
  if (!(phi2 > 0.0 && phi2 < 1.0))
    throw ConfigurationError("geometric schedule needs 0 < phi2 < 1");
  TemperingSchedule s;
  s.phi2_anchor = phi2;
  s.phis.resize(p);
  s.phis[0] = 0.0;
  const double denom = static_cast<double>(p - 2);
  for (std::size_t k = 1; k < p; ++k) {
    // 0-based k corresponds to a = k + 1.
    const double exponent = 1.0 - static_cast<double>(k - 1) / denom;
    s.phis[k] = std::pow(phi2, exponent);
  }
  s.phis[p - 1] = 1.0;
  return s;
}

TemperingSchedule TemperingSchedule::constant(std::size_t p, double phi) {
  if (p < 2) throw ConfigurationError("schedule needs at least two populations");
  TemperingSchedule s;
  s.phis.assign(p, phi);
  s.phi2_anchor = phi;
  return s;
}

std::vector<double> Population::weights() const {
  std::vector<double> lw(particles.size());
  std::transform(particles.begin(), particles.end(), lw.begin(),
                 [](const Particle& p) { return p.log_weight; });
  return normalize_weights(lw).weights;
}

NormalizedWeights normalize_weights(std::span<const double> log_weights) {
  if (log_weights.empty()) throw DegeneratePopulationError("empty weight vector");
  const double max_lw = *std::max_element(log_weights.begin(), log_weights.end());
  if (!std::isfinite(max_lw)) {
    throw DegeneratePopulationError(std::isnan(max_lw) ? "NaN log-weight"
                                                       : "all log-weights are -inf");
  }
  NormalizedWeights out;
  out.weights.resize(log_weights.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < log_weights.size(); ++i) {
    if (std::isnan(log_weights[i])) throw DegeneratePopulationError("NaN log-weight");
    out.weights[i] = std::exp(log_weights[i] - max_lw);
    sum += out.weights[i];
  }
  for (double& w : out.weights) w /= sum;
  out.log_normalizer = max_lw + std::log(sum);
  return out;
}

double ess(std::span<const double> weights) {
  double sum_sq = 0.0;
  for (double w : weights) sum_sq += w * w;
  if (!(sum_sq > 0.0)) throw DegeneratePopulationError("ESS of all-zero weights");
  return 1.0 / sum_sq;
}

std::vector<std::size_t> resample_indices(std::span<const double> weights, Rng& rng,
                                          ResampleScheme scheme) {
  const std::size_t n = weights.size();
  std::vector<std::size_t> idx(n);
  if (scheme == ResampleScheme::kMultinomial) {
    std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
    for (auto& i : idx) i = pick(rng);
    return idx;
  }
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double u = u01(rng) / static_cast<double>(n);
  double cum = weights[0];
  std::size_t j = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double target = u + static_cast<double>(i) / static_cast<double>(n);
    while (target > cum && j + 1 < n) cum += weights[++j];
    idx[i] = j;
  }
  return idx;
}

namespace {
Population resample_with(const Population& pop, Rng& rng, ResampleScheme scheme) {
  const auto w = pop.weights();
  const auto idx = resample_indices(w, rng, scheme);
  Population out;
  out.temper_index = pop.temper_index;
  out.acceptance_rate = pop.acceptance_rate;
  out.particles.reserve(idx.size());
  const double lw = -std::log(static_cast<double>(idx.size()));
  for (std::size_t i : idx) out.particles.push_back({pop.particles[i].position, lw});
  out.ess = static_cast<double>(idx.size());
  return out;
}
}  // namespace

Population multinomial_resample(const Population& pop, Rng& rng) {
  return resample_with(pop, rng, ResampleScheme::kMultinomial);
}

Population systematic_resample(const Population& pop, Rng& rng) {
  return resample_with(pop, rng, ResampleScheme::kSystematic);
}

}  // namespace igsmc
