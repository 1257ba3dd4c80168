#include "igsmc/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <unsupported/Eigen/MatrixFunctions>

#include "igsmc/errors.hpp"
#include "igsmc/geodesic.hpp"
#include "igsmc/normal.hpp"

namespace igsmc {

EvalLevel required_level(KernelType type) {
  switch (type) {
    case KernelType::kUniformRandomWalk:
    case KernelType::kAdaptiveMvn:
      return EvalLevel::kValue;
    case KernelType::kMmalaSimplified:
      return EvalLevel::kMetric;
    case KernelType::kMmalaEuler:
    case KernelType::kMmalaOzaki:
      return EvalLevel::kMetricDerivative;
  }
  return EvalLevel::kValue;
}

bool is_symmetric(KernelType type) {
  return type == KernelType::kUniformRandomWalk || type == KernelType::kAdaptiveMvn;
}

const char* kernel_name(KernelType type) {
  switch (type) {
    case KernelType::kUniformRandomWalk: return "uniform-rw";
    case KernelType::kAdaptiveMvn: return "adaptive-mvn";
    case KernelType::kMmalaEuler: return "mmala";
    case KernelType::kMmalaSimplified: return "mmala-simplified";
    case KernelType::kMmalaOzaki: return "mmala-ozaki";
  }
  return "unknown";
}

LocalGeometry make_local_geometry(Vector grad, MetricBundle metric) {
  LocalGeometry geo;
  geo.grad = std::move(grad);
  geo.metric = std::move(metric);
  geo.regularized = regularize(geo.metric.g);
  geo.g_inv = spd_inverse(geo.regularized);
  return geo;
}

LocalGeometry local_geometry(const TargetSequence& seq, std::size_t a, const PointEvaluation& e) {
  if (!e.usable()) throw OutOfSupportError("geometry requested outside the support");
  return make_local_geometry(seq.grad_log_gamma(a, e), seq.metric(a, e));
}

LocalGeometry local_geometry(const TemperedModel& model, const Vector& xi, double phi,
                             bool with_derivative) {
  const auto e =
      model.evaluate(xi, with_derivative ? EvalLevel::kMetricDerivative : EvalLevel::kMetric);
  if (!e.usable()) throw OutOfSupportError("geometry requested outside the support");
  return make_local_geometry(tempered_gradient(e, phi), tempered_metric(e, phi));
}

Vector drift_correction(const LocalGeometry& geo, DriftForm form) {
  const auto n = geo.g_inv.rows();
  const auto& dg = geo.metric.dg;
  Vector c = Vector::Zero(n);
  if (!geo.metric.has_dg) return c;

  if (form == DriftForm::kChristoffel) {
    const Tensor3 gamma = christoffel_symbols(geo.g_inv, dg);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index k = 0; k < n; ++k) c[i] -= 0.5 * geo.g_inv(j, k) * gamma(i, j, k);
    return c;
  }

  // -sum_j [g^{-1} (d_j g) g^{-1}]_{ij} + 1/2 g^{ij} tr(g^{-1} d_j g)
  Matrix dgj(n, n);
  Vector traces(n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < n; ++k)
      for (Eigen::Index l = 0; l < n; ++l) dgj(k, l) = dg(j, k, l);
    const Matrix prod = geo.g_inv * dgj * geo.g_inv;
    c -= prod.col(j);
    traces[j] = (geo.g_inv * dgj).trace();
  }
  c += 0.5 * geo.g_inv * traces;
  return c;
}

Vector langevin_drift(const LocalGeometry& geo, DriftForm form, bool include_correction) {
  Vector b = 0.5 * geo.g_inv * geo.grad;
  if (include_correction) b += drift_correction(geo, form);
  return b;
}

namespace {
void mark(KernelProposal& q, const LocalGeometry& geo) {
  q.diagnostics.jitter = std::max(q.diagnostics.jitter, geo.regularized.jitter);
  q.diagnostics.singular = q.diagnostics.singular || geo.regularized.singular;
}
}  // namespace

KernelProposal mmala_euler_proposal(const LocalGeometry& geo, const Vector& xi, double epsilon,
                                    DriftForm form) {
  if (!geo.metric.has_dg) throw CapabilityError("mMALA needs metric derivatives");
  const double eps2 = epsilon * epsilon;
  KernelProposal q(xi + eps2 * langevin_drift(geo, form), eps2 * geo.g_inv);
  mark(q, geo);
  return q;
}

KernelProposal mmala_simplified_proposal(const LocalGeometry& geo, const Vector& xi,
                                         double epsilon) {
  const double eps2 = epsilon * epsilon;
  KernelProposal q(xi + eps2 * langevin_drift(geo, DriftForm::kPrinted, false),
                   eps2 * geo.g_inv);
  mark(q, geo);
  return q;
}

Matrix exp_integral(const Matrix& jacobian, double h) {
  const auto n = jacobian.rows();
  // exp([[hJ, hI], [0, 0]]) carries J^{-1}(e^{hJ} - I) in its top-right block.
  Matrix aug = Matrix::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = h * jacobian;
  aug.topRightCorner(n, n) = h * Matrix::Identity(n, n);
  const Matrix e = aug.exp();
  return e.topRightCorner(n, n);
}

Matrix drift_jacobian(const GeometryFn& geometry, const Vector& xi, DriftForm form) {
  const auto n = xi.size();
  Matrix jac(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    const double h = 1e-6 * std::max(std::abs(xi[j]), 1.0);
    Vector up = xi, down = xi;
    up[j] += h;
    down[j] -= h;
    // One-sided difference if a perturbed point leaves the support.
    double span = 2.0 * h;
    Vector b_up, b_down;
    try {
      b_up = langevin_drift(geometry(up), form);
    } catch (const DomainError&) {
      b_up = langevin_drift(geometry(xi), form);
      span = h;
    }
    try {
      b_down = langevin_drift(geometry(down), form);
    } catch (const DomainError&) {
      b_down = langevin_drift(geometry(xi), form);
      span = h;
    }
    jac.col(j) = (b_up - b_down) / span;
  }
  return jac;
}

Matrix linearised_covariance(const Matrix& jacobian, const Matrix& q, double h) {
  const auto n = jacobian.rows();
  Matrix aug = Matrix::Zero(2 * n, 2 * n);
  aug.topLeftCorner(n, n) = -h * jacobian;
  aug.topRightCorner(n, n) = h * q;
  aug.bottomRightCorner(n, n) = h * jacobian.transpose();
  const Matrix e = aug.exp();
  Matrix cov = e.bottomRightCorner(n, n).transpose() * e.topRightCorner(n, n);
  return 0.5 * (cov + cov.transpose());
}

KernelProposal mmala_ozaki_proposal(const GeometryFn& geometry, const LocalGeometry& geo,
                                    const Vector& xi, double epsilon, DriftForm form,
                                    OzakiCovariance cov_form) {
  const double eps2 = epsilon * epsilon;
  const Vector b = langevin_drift(geo, form);
  const Matrix jac = drift_jacobian(geometry, xi, form);
  Matrix cov;
  if (cov_form == OzakiCovariance::kPrinted) {
    cov = 0.5 * geo.g_inv * exp_integral(jac, 2.0 * eps2);
    cov = 0.5 * (cov + cov.transpose());
  } else {
    cov = linearised_covariance(jac, geo.g_inv, eps2);
  }
  KernelProposal q(xi + exp_integral(jac, eps2) * b, cov);
  mark(q, geo);
  Eigen::JacobiSVD<Matrix> svd(jac);
  const auto& sv = svd.singularValues();
  q.diagnostics.jacobian_condition = sv[sv.size() - 1] > 0.0 ? sv[0] / sv[sv.size() - 1] : kInf;
  return q;
}

KernelProposal mmala_euler_proposal(const TemperedModel& model, const Vector& xi, double phi,
                                    double epsilon, DriftForm form) {
  return mmala_euler_proposal(local_geometry(model, xi, phi, true), xi, epsilon, form);
}

KernelProposal mmala_simplified_proposal(const TemperedModel& model, const Vector& xi, double phi,
                                         double epsilon) {
  return mmala_simplified_proposal(local_geometry(model, xi, phi, false), xi, epsilon);
}

KernelProposal mmala_ozaki_proposal(const TemperedModel& model, const Vector& xi, double phi,
                                    double epsilon, DriftForm form, OzakiCovariance cov) {
  GeometryFn fn = [&](const Vector& x) { return local_geometry(model, x, phi, true); };
  return mmala_ozaki_proposal(fn, fn(xi), xi, epsilon, form, cov);
}

Vector rw_uniform_propose(const Vector& xi, double width, Rng& rng) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  Vector out = xi;
  for (auto i = 0; i < out.size(); ++i) out[i] += width * u(rng);
  return out;
}

double rw_uniform_kernel_density(double prev, double next, const Gaussian1d& target,
                                 double width) {
  if (!(width > 0.0) || !(target.var > 0.0))
    throw ConfigurationError("uniform kernel needs positive width and variance");
  const double sd = std::sqrt(target.var);
  const double half = 0.5 * width;
  if (next != prev) {
    if (std::abs(next - prev) > half) return 0.0;
    const double zn = (next - target.mean) / sd;
    const double zp = (prev - target.mean) / sd;
    return std::min(1.0, std::exp(-0.5 * zn * zn + 0.5 * zp * zp)) / width;
  }
  // Rejection mass at prev. With r = |prev - mean|, proposals with |y| < r
  // are always accepted; the rest are accepted with probability
  // pi(y)/pi(prev), whose integrals are normal interval probabilities.
  const double r = std::abs(prev - target.mean);
  const double z = r / sd;
  const double log_scale = std::log(width) + normal::log_pdf(z) - std::log(sd);
  double accepted = std::min(0.5, 2.0 * r / width);
  accepted += std::exp(normal::log_interval_probability(-(r + half) / sd, -z) - log_scale);
  if (half > 2.0 * r)
    accepted += std::exp(normal::log_interval_probability((r - half) / sd, -z) - log_scale);
  return std::clamp(1.0 - accepted, 0.0, 1.0);
}

KernelProposal adaptive_mvn_proposal(std::span<const Vector> positions,
                                     std::span<const double> weights) {
  if (positions.empty() || positions.size() != weights.size())
    throw ShapeError("adaptive MVN needs matching positions and weights");
  const auto d = positions.front().size();
  bool distinct = false;
  for (const auto& x : positions)
    if (x != positions.front()) {
      distinct = true;
      break;
    }
  if (!distinct) throw DegeneratePopulationError("adaptive MVN: all particles identical");

  Vector mean = Vector::Zero(d);
  double sum_sq = 0.0;
  for (std::size_t n = 0; n < positions.size(); ++n) {
    mean += weights[n] * positions[n];
    sum_sq += weights[n] * weights[n];
  }
  Matrix cov = Matrix::Zero(d, d);
  for (std::size_t n = 0; n < positions.size(); ++n) {
    const Vector c = positions[n] - mean;
    cov += weights[n] * c * c.transpose();
  }
  if (sum_sq < 1.0) cov /= (1.0 - sum_sq);
  const double scale = 2.38 * 2.38 / static_cast<double>(d);
  return KernelProposal(Vector::Zero(d), scale * cov);
}

MoveRecord mh_step(const LogTargetFn& log_target, const Vector& current, const ProposalFn& proposal,
                   Rng& rng) {
  MoveRecord rec;
  const double lt_cur = log_target(current);
  if (!std::isfinite(lt_cur)) throw std::logic_error("mh_step: current state has zero density");
  const KernelProposal fwd = proposal(current);
  rec.jittered = fwd.diagnostics.singular;
  rec.proposed = fwd.sample(rng);
  rec.log_q_forward = fwd.log_density(rec.proposed);
  if (!std::isfinite(rec.log_q_forward))
    throw std::logic_error("mh_step: non-finite forward proposal density");
  const double lt_new = log_target(rec.proposed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double u = u01(rng);
  if (!(lt_new > kNegInf)) return rec;
  try {
    const KernelProposal rev = proposal(rec.proposed);
    rec.jittered = rec.jittered || rev.diagnostics.singular;
    rec.log_q_reverse = rev.log_density(current);
  } catch (const DomainError&) {
    return rec;
  } catch (const SingularMetricError&) {
    return rec;
  }
  rec.log_alpha = std::min(0.0, lt_new - lt_cur + rec.log_q_reverse - rec.log_q_forward);
  rec.accepted = std::log(u) < rec.log_alpha;
  return rec;
}

TransitionKernel::TransitionKernel(KernelSpec spec) : spec_(spec) {
  if (spec_.type == KernelType::kUniformRandomWalk && !(spec_.width > 0.0))
    throw ConfigurationError("uniform random walk needs a positive width");
  if (!is_symmetric(spec_.type) && !(spec_.epsilon > 0.0))
    throw ConfigurationError("mMALA needs a positive step size");
}

void TransitionKernel::prepare(std::span<const Vector> positions, std::span<const double> weights) {
  if (spec_.type == KernelType::kAdaptiveMvn)
    perturbation_ = adaptive_mvn_proposal(positions, weights);
}

KernelProposal TransitionKernel::proposal(const TargetSequence& seq, std::size_t a,
                                          const PointEvaluation& at) const {
  const double eps = spec_.epsilon;
  switch (spec_.type) {
    case KernelType::kUniformRandomWalk:
      throw CapabilityError("the uniform random walk is not a Gaussian proposal");
    case KernelType::kAdaptiveMvn: {
      if (!perturbation_) throw ConfigurationError("adaptive MVN kernel used before prepare()");
      KernelProposal q(at.xi + perturbation_->mean(), perturbation_->covariance());
      return q;
    }
    case KernelType::kMmalaSimplified:
      return mmala_simplified_proposal(local_geometry(seq, a, at), at.xi, eps);
    case KernelType::kMmalaEuler:
      return mmala_euler_proposal(local_geometry(seq, a, at), at.xi, eps, spec_.drift_form);
    case KernelType::kMmalaOzaki: {
      GeometryFn fn = [&](const Vector& x) {
        return local_geometry(seq, a, seq.evaluate(x, EvalLevel::kMetricDerivative));
      };
      return mmala_ozaki_proposal(fn, local_geometry(seq, a, at), at.xi, eps, spec_.drift_form,
                                  spec_.ozaki_covariance);
    }
  }
  throw std::logic_error("unknown kernel type");
}

MoveRecord TransitionKernel::move(const TargetSequence& seq, std::size_t a,
                                  const PointEvaluation& current, Rng& rng) const {
  MoveRecord rec;
  const double lt_cur = seq.log_gamma(a, current);
  if (!(lt_cur > kNegInf)) throw std::logic_error("move: current particle has zero density");

  std::optional<KernelProposal> fwd;
  if (spec_.type == KernelType::kUniformRandomWalk) {
    rec.proposed = rw_uniform_propose(current.xi, spec_.width, rng);
  } else if (spec_.type == KernelType::kAdaptiveMvn) {
    if (!perturbation_) throw ConfigurationError("adaptive MVN kernel used before prepare()");
    rec.proposed = current.xi + perturbation_->sample(rng);
  } else {
    try {
      fwd = proposal(seq, a, current);
    } catch (const SingularMetricError&) {
      rec.jittered = true;
      rec.proposed = current.xi;
      return rec;
    }
    rec.jittered = fwd->diagnostics.singular;
    rec.proposed = fwd->sample(rng);
    rec.log_q_forward = fwd->log_density(rec.proposed);
    if (!std::isfinite(rec.log_q_forward))
      throw std::logic_error("move: non-finite forward proposal density");
  }
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const double u = u01(rng);

  rec.evaluation = seq.evaluate(rec.proposed, level());
  rec.failed = rec.evaluation.in_support && rec.evaluation.failed;
  if (!rec.evaluation.usable()) return rec;
  const double lt_new = seq.log_gamma(a, rec.evaluation);
  if (!(lt_new > kNegInf)) return rec;

  if (fwd) {
    try {
      const KernelProposal rev = proposal(seq, a, rec.evaluation);
      rec.jittered = rec.jittered || rev.diagnostics.singular;
      rec.log_q_reverse = rev.log_density(current.xi);
    } catch (const DomainError&) {
      return rec;
    } catch (const SingularMetricError&) {
      rec.jittered = true;
      return rec;
    }
  }
  const double log_ratio = lt_new - lt_cur + rec.log_q_reverse - rec.log_q_forward;
  rec.log_alpha = std::isnan(log_ratio) ? kNegInf : std::min(0.0, log_ratio);
  rec.accepted = std::log(u) < rec.log_alpha;
  return rec;
}

}  // namespace igsmc
