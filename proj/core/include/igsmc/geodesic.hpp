#pragma once

#include <functional>
#include <vector>

#include "igsmc/types.hpp"

namespace igsmc {

/// Univariate normal N(mu, var) as a point on the statistical manifold.
struct GaussianPoint {
  double mu = 0.0;
  double var = 1.0;
};

/// Natural parameters (Delta, delta) = (1/var, mu/var).
struct CanonicalPoint {
  double Delta = 1.0;
  double delta = 0.0;
};

/// (d, P) acting as (mu, var) -> (P mu + d, P^2 var).
struct AffineGroupElement {
  double d = 0.0;
  double P = 1.0;
};

struct GeodesicConstants {
  double R = 0.0;
  double G = 0.0;
  double sign = 1.0;  // sign of the delta coordinate of the end point
  // 1 - R, 1 + R and sqrt((1 - R^2) / 2), each computed without
  // cancellation; R is close to +-1 for long or nearly vertical geodesics
  double one_minus_R = 1.0;
  double one_plus_R = 1.0;
  double spread = 0.0;
};

CanonicalPoint to_canonical(const GaussianPoint& p);
GaussianPoint from_canonical(const CanonicalPoint& c);

/// R and G of the geodesic from the origin N(0, 1) that reaches `end` at t = 1.
GeodesicConstants solve_RG(const CanonicalPoint& end);

/// Geodesic through the origin, in canonical coordinates.
CanonicalPoint geodesic_through_origin(double R, double G, double t, double sign = 1.0);
CanonicalPoint geodesic_through_origin(const GeodesicConstants& k, double t);

GaussianPoint group_act(const AffineGroupElement& g, const GaussianPoint& p);
CanonicalPoint group_act(const AffineGroupElement& g, const CanonicalPoint& c);
AffineGroupElement group_inverse(const AffineGroupElement& g);
/// The element taking N(0, 1) to p.
AffineGroupElement element_from_origin(const GaussianPoint& p);

/// Fisher-Rao geodesic between two univariate normals, parametrised on [0, 1].
class Geodesic {
 public:
  Geodesic(const GaussianPoint& from, const GaussianPoint& to);
  GaussianPoint operator()(double t) const;
  bool is_constant() const { return constant_; }
  const GeodesicConstants& constants() const { return constants_; }

 private:
  GaussianPoint from_;
  AffineGroupElement to_start_;
  GeodesicConstants constants_;
  bool constant_ = false;
};

using GaussianPath = std::vector<GaussianPoint>;
using CurveFn = std::function<GaussianPoint(double)>;

/// n points at uniform parameter spacing.
GaussianPath geodesic_between(const GaussianPoint& p1, const GaussianPoint& p2, std::size_t n);
/// Linear interpolation in (mu, var).
GaussianPath straight_line_path(const GaussianPoint& p1, const GaussianPoint& p2, std::size_t n);
/// mu moves during the first half of the parameter range, var in the second.
GaussianPath two_stage_path(const GaussianPoint& p1, const GaussianPoint& p2, std::size_t n);

GaussianPoint straight_line_at(const GaussianPoint& p1, const GaussianPoint& p2, double t);
GaussianPoint two_stage_at(const GaussianPoint& p1, const GaussianPoint& p2, double t);

/// Fisher length of a polyline, each segment measured with the metric
/// ds^2 = dmu^2 / var + dvar^2 / (2 var^2) at its midpoint.
double fisher_length(const GaussianPath& path);
double fisher_length(const CurveFn& curve, std::size_t segments = 20000);

struct KlCheck {
  double kl = 0.0;
  double half_ds2 = 0.0;
};

/// KL(N(p) || N(p + dxi)) against half the squared Fisher line element,
/// in (mu, var) coordinates.
KlCheck kl_vs_metric_check(const GaussianPoint& p, const Vector& dxi);

/// Levi-Civita symbols Gamma(i, j, k) = Gamma^i_{jk}
/// = 1/2 g^{il} (d_j g_lk + d_k g_lj - d_l g_jk), with dg(k, i, j) = d_k g_ij.
Tensor3 christoffel_symbols(const Matrix& g_inv, const Tensor3& dg);

using MetricFn = std::function<Matrix(const Vector&)>;
using MetricDerivativeFn = std::function<Tensor3(const Vector&)>;
Tensor3 christoffel(const MetricFn& g, const MetricDerivativeFn& dg, const Vector& xi);

/// Largest residual of the (mu, var) geodesic equations
///   var'' + mu'^2 - var'^2 / var = 0,  mu'' - var' mu' / var = 0
/// at parameter t, using fourth-order central differences with step h.
/// Each residual is divided by max(1, largest term in its equation).
double geodesic_residual(const CurveFn& curve, double t, double h = 1e-3);

}  // namespace igsmc
