#pragma once

#include "igsmc/regularize.hpp"
#include "igsmc/rng.hpp"
#include "igsmc/types.hpp"

namespace igsmc {

/// Which algebraic form of the position-dependent drift correction to use.
/// kPrinted: three-term form with the metric derivatives;
/// kChristoffel: -eps^2/2 g^{jk} Gamma^i_{jk} contraction.
enum class DriftForm { kPrinted, kChristoffel };

#ifdef IGSMC_CHRISTOFFEL_DRIFT
inline constexpr DriftForm kDefaultDriftForm = DriftForm::kChristoffel;
#else
inline constexpr DriftForm kDefaultDriftForm = DriftForm::kPrinted;
#endif

struct ProposalDiagnostics {
  double jitter = 0.0;
  bool singular = false;
  double jacobian_condition = kNaN;  // Ozaki only
};

/// Gaussian proposal N(mean, covariance); the covariance is regularized on
/// construction.
class KernelProposal {
 public:
  KernelProposal() = default;
  KernelProposal(Vector mean, const Matrix& covariance);

  const Vector& mean() const { return mean_; }
  const Matrix& covariance() const { return covariance_; }
  const Matrix& cholesky_lower() const { return lower_; }
  std::size_t dim() const { return static_cast<std::size_t>(mean_.size()); }

  double log_density(const Vector& at) const;
  Vector sample(Rng& rng) const;

  ProposalDiagnostics diagnostics;

 private:
  Vector mean_;
  Matrix covariance_;
  Matrix lower_;
  double log_det_ = 0.0;
};

}  // namespace igsmc
