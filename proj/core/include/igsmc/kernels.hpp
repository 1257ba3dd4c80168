#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "igsmc/models.hpp"
#include "igsmc/proposal.hpp"
#include "igsmc/rng.hpp"
#include "igsmc/target.hpp"

namespace igsmc {

enum class KernelType {
  kUniformRandomWalk,
  kAdaptiveMvn,
  kMmalaEuler,
  kMmalaSimplified,
  kMmalaOzaki,
};

/// Covariance of the Ozaki proposal.
enum class OzakiCovariance {
  /// Symmetric part of g^{-1} J^{-1}(exp(2 eps^2 J) - I) / 2.
  kPrinted,
  /// Exact covariance of the linearised diffusion over time eps^2,
  /// int_0^{eps^2} e^{sJ} g^{-1} e^{sJ^T} ds. Always SPD. When J g^{-1} is
  /// symmetric this is F(2 eps^2) g^{-1} / 2, which matches kPrinted only if
  /// J also commutes with g^{-1}.
  kLinearisedSde,
};

struct KernelSpec {
  KernelType type = KernelType::kMmalaEuler;
  double epsilon = 0.5;  // mMALA step size
  double width = 0.25;   // uniform random-walk box width
  DriftForm drift_form = kDefaultDriftForm;
  OzakiCovariance ozaki_covariance = OzakiCovariance::kPrinted;
};

EvalLevel required_level(KernelType type);
bool is_symmetric(KernelType type);
const char* kernel_name(KernelType type);

/// Score and metric of one target at one point, with the regularized
/// inverse metric the mMALA proposals are built from.
struct LocalGeometry {
  Vector grad;
  MetricBundle metric;
  RegularizedMatrix regularized;
  Matrix g_inv;
};

LocalGeometry make_local_geometry(Vector grad, MetricBundle metric);
LocalGeometry local_geometry(const TargetSequence& seq, std::size_t a, const PointEvaluation& e);
LocalGeometry local_geometry(const TemperedModel& model, const Vector& xi, double phi,
                             bool with_derivative = true);

/// Position-dependent part of the Langevin drift, c in b = g^{-1} grad / 2 + c.
Vector drift_correction(const LocalGeometry& geo, DriftForm form);

/// Langevin drift b. Without metric derivatives only the natural-gradient
/// term is used.
Vector langevin_drift(const LocalGeometry& geo, DriftForm form, bool include_correction = true);

KernelProposal mmala_euler_proposal(const LocalGeometry& geo, const Vector& xi, double epsilon,
                                    DriftForm form = kDefaultDriftForm);
KernelProposal mmala_simplified_proposal(const LocalGeometry& geo, const Vector& xi,
                                         double epsilon);

using GeometryFn = std::function<LocalGeometry(const Vector&)>;

/// J^{-1}(exp(h J) - I), defined for singular J too.
Matrix exp_integral(const Matrix& jacobian, double h);

/// Finite-difference Jacobian of the Langevin drift.
Matrix drift_jacobian(const GeometryFn& geometry, const Vector& xi, DriftForm form);

/// int_0^h e^{sJ} Q e^{sJ^T} ds by Van Loan's block exponential.
Matrix linearised_covariance(const Matrix& jacobian, const Matrix& q, double h);

KernelProposal mmala_ozaki_proposal(const GeometryFn& geometry, const LocalGeometry& geo,
                                    const Vector& xi, double epsilon,
                                    DriftForm form = kDefaultDriftForm,
                                    OzakiCovariance cov = OzakiCovariance::kPrinted);

KernelProposal mmala_euler_proposal(const TemperedModel& model, const Vector& xi, double phi,
                                    double epsilon, DriftForm form = kDefaultDriftForm);
KernelProposal mmala_simplified_proposal(const TemperedModel& model, const Vector& xi, double phi,
                                         double epsilon);
KernelProposal mmala_ozaki_proposal(const TemperedModel& model, const Vector& xi, double phi,
                                    double epsilon, DriftForm form = kDefaultDriftForm,
                                    OzakiCovariance cov = OzakiCovariance::kPrinted);

Vector rw_uniform_propose(const Vector& xi, double width, Rng& rng);

/// Transition density of one Metropolis step with a uniform proposal of
/// width d targeting N(mean, var). For new == prev it returns the rejection
/// probability (the mass of the atom at prev); otherwise the continuous
/// density, zero outside the proposal box.
double rw_uniform_kernel_density(double prev, double next, const Gaussian1d& target, double width);

/// Zero-mean Gaussian perturbation with covariance (2.38^2 / D) times the
/// weighted sample covariance. Needs at least two distinct positions.
KernelProposal adaptive_mvn_proposal(std::span<const Vector> positions,
                                     std::span<const double> weights);

struct MoveRecord {
  Vector proposed;
  bool accepted = false;
  double log_alpha = kNegInf;
  double log_q_forward = 0.0;
  double log_q_reverse = 0.0;
  PointEvaluation evaluation;  // at `proposed`, when it was evaluated
  bool failed = false;         // proposal evaluation failed numerically
  bool jittered = false;       // a metric needed regularization
};

using LogTargetFn = std::function<double(const Vector&)>;
/// Returns the proposal centred on its argument; may throw OutOfSupportError.
using ProposalFn = std::function<KernelProposal(const Vector&)>;

/// One Metropolis-Hastings step with an asymmetric Gaussian proposal.
MoveRecord mh_step(const LogTargetFn& log_target, const Vector& current, const ProposalFn& proposal,
                   Rng& rng);

/// Move of a single particle under target `a` of a sequence.
class TransitionKernel {
 public:
  explicit TransitionKernel(KernelSpec spec);

  const KernelSpec& spec() const { return spec_; }
  EvalLevel level() const { return required_level(spec_.type); }

  /// Builds population-level state (adaptive MVN covariance). A no-op for
  /// the other kernels.
  void prepare(std::span<const Vector> positions, std::span<const double> weights);

  /// Gaussian proposal at a point (not for the uniform random walk).
  KernelProposal proposal(const TargetSequence& seq, std::size_t a, const PointEvaluation& at) const;

  /// `current` must be evaluated at least at level().
  MoveRecord move(const TargetSequence& seq, std::size_t a, const PointEvaluation& current,
                  Rng& rng) const;

 private:
  KernelSpec spec_;
  std::optional<KernelProposal> perturbation_;
};

}  // namespace igsmc
