#include "igsmc/proposal.hpp"

#include <cmath>
#include <numbers>
#include <random>

#include "igsmc/errors.hpp"

namespace igsmc {

RegularizedMatrix regularize(const Matrix& g) {
  if (g.rows() != g.cols() || g.rows() == 0) throw ShapeError("regularize: matrix must be square");
  const auto d = static_cast<double>(g.rows());
  const double scale = std::abs(g.trace()) / d;
  static constexpr double kLadder[] = {0.0, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2};
  const Matrix sym = 0.5 * (g + g.transpose());
  for (double c : kLadder) {
    const double jitter = c == 0.0 ? 0.0 : std::max(c * scale, 1e-12);
    Matrix m = sym;
    m.diagonal().array() += jitter;
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() != Eigen::Success) continue;
    Matrix lower = llt.matrixL();
    const auto diag = lower.diagonal().array();
    if (!diag.allFinite()) continue;
    const double lo = diag.minCoeff();
    const double hi = diag.maxCoeff();
    if (!(lo > 0.0) || (lo * lo) / (hi * hi) < 1e-14) continue;
    return {std::move(m), std::move(lower), jitter, jitter > 0.0};
  }
  throw SingularMetricError("metric is not positive definite at the largest jitter");
}

Matrix spd_inverse(const RegularizedMatrix& r) {
  const auto n = r.lower.rows();
  Matrix inv = Matrix::Identity(n, n);
  r.lower.triangularView<Eigen::Lower>().solveInPlace(inv);
  r.lower.triangularView<Eigen::Lower>().transpose().solveInPlace(inv);
  return 0.5 * (inv + inv.transpose());
}

KernelProposal::KernelProposal(Vector mean, const Matrix& covariance) : mean_(std::move(mean)) {
  if (covariance.rows() != mean_.size() || covariance.cols() != mean_.size())
    throw ShapeError("proposal covariance does not match the mean");
  if (!mean_.allFinite()) throw DomainError("proposal mean is not finite");
  auto reg = regularize(covariance);
  covariance_ = std::move(reg.matrix);
  lower_ = std::move(reg.lower);
  diagnostics.jitter = reg.jitter;
  diagnostics.singular = reg.singular;
  log_det_ = 2.0 * lower_.diagonal().array().log().sum();
}

double KernelProposal::log_density(const Vector& at) const {
  const Vector z = lower_.triangularView<Eigen::Lower>().solve(at - mean_);
  const double d = static_cast<double>(mean_.size());
  return -0.5 * (z.squaredNorm() + log_det_ + d * std::log(2.0 * std::numbers::pi));
}

Vector KernelProposal::sample(Rng& rng) const {
  std::normal_distribution<double> n01;
  Vector z(mean_.size());
  for (auto i = 0; i < z.size(); ++i) z[i] = n01(rng);
  return mean_ + lower_ * z;
}

}  // namespace igsmc
