#include "igsmc/geodesic.hpp"

#include <algorithm>
#include <cmath>

#include "igsmc/errors.hpp"

namespace igsmc {

CanonicalPoint to_canonical(const GaussianPoint& p) {
  if (!(p.var > 0.0)) throw DomainError("variance must be positive");
  return {1.0 / p.var, p.mu / p.var};
}

GaussianPoint from_canonical(const CanonicalPoint& c) {
  if (!(c.Delta > 0.0)) throw DomainError("precision must be positive");
  return {c.delta / c.Delta, 1.0 / c.Delta};
}

GeodesicConstants solve_RG(const CanonicalPoint& end) {
  const double D = end.Delta;
  const double d = end.delta;
  if (!(D > 0.0)) throw DomainError("precision must be positive");
  if (D == 1.0 && d == 0.0) throw DomainError("geodesic end point coincides with the origin");
  const double d2 = d * d;
  const double D2 = D * D;
  const double q = d2 * d2 + 4.0 * d2 * D2 + 4.0 * d2 * D + 4.0 * D2 * D2 - 8.0 * D2 * D + 4.0 * D2;
  GeodesicConstants k;
  k.R = (d2 - 2.0 * D2 + 2.0 * D) / std::sqrt(q);
  if (std::abs(k.R) > 1.0) {
    if (std::abs(k.R) > 1.0 + 1e-12) throw DomainError("|R| exceeds 1");
    k.R = std::copysign(1.0, k.R);
  }
  double arg = (d2 * d2 + 4.0 * d2 * D2 + 4.0 * d2 * D + 4.0 * D2 * D2 + 4.0 * D2) / (8.0 * D2 * D);
  if (arg < 1.0) {
    if (arg < 1.0 - 1e-12) throw DomainError("arccosh argument below 1");
    arg = 1.0;
  }
  k.G = std::acosh(arg);
  k.sign = d < 0.0 ? -1.0 : 1.0;
  // With n the numerator of R, q - n^2 = 8 d^2 D^2 exactly, which gives the
  // smaller of 1 -+ R without subtraction.
  const double n = d2 - 2.0 * D2 + 2.0 * D;
  const double sq = std::sqrt(q);
  const double m = 8.0 * d2 * D2;
  if (n >= 0.0) {
    k.one_plus_R = 1.0 + n / sq;
    k.one_minus_R = m / (sq * (sq + n));
  } else {
    k.one_minus_R = 1.0 - n / sq;
    k.one_plus_R = m / (sq * (sq - n));
  }
  k.spread = 2.0 * std::abs(d) * D / sq;
  return k;
}

namespace {
// The cosh/sinh form rewritten in exponentials so that Delta is a sum of
// positive terms:
//   Delta = (1 - R^2)/2 + (1 - R)^2 e^x / 4 + (1 + R)^2 e^-x / 4
//   delta = s (R + (1 - R) e^x / 2 - (1 + R) e^-x / 2),  x = tG
CanonicalPoint origin_curve(double R, double omr, double opr, double G, double t, double sign,
                            double spread) {
  const double ep = std::exp(t * G), em = std::exp(-t * G);
  CanonicalPoint c;
  c.Delta = 0.5 * omr * opr + 0.25 * omr * omr * ep + 0.25 * opr * opr * em;
  c.delta = sign * spread * (R + 0.5 * omr * ep - 0.5 * opr * em);
  return c;
}
}  // namespace

CanonicalPoint geodesic_through_origin(double R, double G, double t, double sign) {
  return origin_curve(R, 1.0 - R, 1.0 + R, G, t, sign,
                      std::sqrt(std::max(0.0, 0.5 * (1.0 - R * R))));
}

CanonicalPoint geodesic_through_origin(const GeodesicConstants& k, double t) {
  return origin_curve(k.R, k.one_minus_R, k.one_plus_R, k.G, t, k.sign, k.spread);
}

GaussianPoint group_act(const AffineGroupElement& g, const GaussianPoint& p) {
  return {g.P * p.mu + g.d, g.P * g.P * p.var};
}

CanonicalPoint group_act(const AffineGroupElement& g, const CanonicalPoint& c) {
  const double p2 = g.P * g.P;
  return {c.Delta / p2, c.delta / g.P + g.d * c.Delta / p2};
}

AffineGroupElement group_inverse(const AffineGroupElement& g) {
  if (!(g.P > 0.0)) throw DomainError("group element needs P > 0");
  return {-g.d / g.P, 1.0 / g.P};
}

AffineGroupElement element_from_origin(const GaussianPoint& p) {
  if (!(p.var > 0.0)) throw DomainError("variance must be positive");
  return {p.mu, std::sqrt(p.var)};
}

Geodesic::Geodesic(const GaussianPoint& from, const GaussianPoint& to)
    : from_(from), to_start_(element_from_origin(from)) {
  if (!(to.var > 0.0)) throw DomainError("variance must be positive");
  const auto end = to_canonical(group_act(group_inverse(to_start_), to));
  constant_ = (from.mu == to.mu && from.var == to.var) ||
              (std::abs(end.Delta - 1.0) < 1e-15 && std::abs(end.delta) < 1e-15);
  if (!constant_) constants_ = solve_RG(end);
}

GaussianPoint Geodesic::operator()(double t) const {
  if (constant_) return from_;
  return group_act(to_start_, from_canonical(geodesic_through_origin(constants_, t)));
}

namespace {
template <typename F>
GaussianPath sample_path(std::size_t n, F&& at) {
  if (n < 2) throw ConfigurationError("a path needs at least two points");
  GaussianPath path(n);
  for (std::size_t k = 0; k < n; ++k)
    path[k] = at(static_cast<double>(k) / static_cast<double>(n - 1));
  return path;
}
}  // namespace

GaussianPath geodesic_between(const GaussianPoint& p1, const GaussianPoint& p2, std::size_t n) {
  const Geodesic geo(p1, p2);
  return sample_path(n, geo);
}

GaussianPoint straight_line_at(const GaussianPoint& p1, const GaussianPoint& p2, double t) {
  return {p1.mu + t * (p2.mu - p1.mu), p1.var + t * (p2.var - p1.var)};
}

GaussianPoint two_stage_at(const GaussianPoint& p1, const GaussianPoint& p2, double t) {
  if (t <= 0.5) return {p1.mu + 2.0 * t * (p2.mu - p1.mu), p1.var};
  return {p2.mu, p1.var + (2.0 * t - 1.0) * (p2.var - p1.var)};
}

GaussianPath straight_line_path(const GaussianPoint& p1, const GaussianPoint& p2, std::size_t n) {
  return sample_path(n, [&](double t) { return straight_line_at(p1, p2, t); });
}

GaussianPath two_stage_path(const GaussianPoint& p1, const GaussianPoint& p2, std::size_t n) {
  return sample_path(n, [&](double t) { return two_stage_at(p1, p2, t); });
}

double fisher_length(const GaussianPath& path) {
  double len = 0.0;
  for (std::size_t k = 1; k < path.size(); ++k) {
    const double dmu = path[k].mu - path[k - 1].mu;
    const double dv = path[k].var - path[k - 1].var;
    const double v = 0.5 * (path[k].var + path[k - 1].var);
    len += std::sqrt(dmu * dmu / v + dv * dv / (2.0 * v * v));
  }
  return len;
}

double fisher_length(const CurveFn& curve, std::size_t segments) {
  GaussianPath path(segments + 1);
  for (std::size_t k = 0; k <= segments; ++k)
    path[k] = curve(static_cast<double>(k) / static_cast<double>(segments));
  return fisher_length(path);
}

KlCheck kl_vs_metric_check(const GaussianPoint& p, const Vector& dxi) {
  if (dxi.size() != 2) throw ShapeError("displacement must be (dmu, dvar)");
  const double v1 = p.var + dxi[1];
  if (!(p.var > 0.0) || !(v1 > 0.0)) throw DomainError("variance must be positive");
  KlCheck out;
  out.kl = 0.5 * (p.var / v1 + dxi[0] * dxi[0] / v1 - 1.0 + std::log(v1 / p.var));
  out.half_ds2 = 0.5 * (dxi[0] * dxi[0] / p.var + dxi[1] * dxi[1] / (2.0 * p.var * p.var));
  return out;
}

Tensor3 christoffel_symbols(const Matrix& g_inv, const Tensor3& dg) {
  const auto n = static_cast<std::size_t>(g_inv.rows());
  Tensor3 gamma(n, n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = j; k < n; ++k) {
        double s = 0.0;
        for (std::size_t l = 0; l < n; ++l)
          s += g_inv(i, l) * (dg(j, l, k) + dg(k, l, j) - dg(l, j, k));
        gamma(i, j, k) = 0.5 * s;
        gamma(i, k, j) = 0.5 * s;
      }
  return gamma;
}

Tensor3 christoffel(const MetricFn& g, const MetricDerivativeFn& dg, const Vector& xi) {
  const Matrix gm = g(xi);
  Eigen::FullPivLU<Matrix> lu(gm);
  if (!lu.isInvertible()) throw SingularMetricError("Christoffel symbols need an invertible metric");
  return christoffel_symbols(lu.inverse(), dg(xi));
}

double geodesic_residual(const CurveFn& curve, double t, double h) {
  const GaussianPoint m2 = curve(t - 2 * h), m1 = curve(t - h), c = curve(t), p1 = curve(t + h),
                      p2 = curve(t + 2 * h);
  auto d1 = [&](double a2, double a1, double b1, double b2) {
    return (a2 - 8.0 * a1 + 8.0 * b1 - b2) / (12.0 * h);
  };
  auto d2 = [&](double a2, double a1, double x, double b1, double b2) {
    return (-a2 + 16.0 * a1 - 30.0 * x + 16.0 * b1 - b2) / (12.0 * h * h);
  };
  const double mu_d = d1(m2.mu, m1.mu, p1.mu, p2.mu);
  const double v_d = d1(m2.var, m1.var, p1.var, p2.var);
  const double mu_dd = d2(m2.mu, m1.mu, c.mu, p1.mu, p2.mu);
  const double v_dd = d2(m2.var, m1.var, c.var, p1.var, p2.var);
  const double a1 = mu_d * mu_d, b1 = v_d * v_d / c.var, b2 = v_d * mu_d / c.var;
  const double r1 = (v_dd + a1 - b1) / std::max({1.0, std::abs(v_dd), a1, b1});
  const double r2 = (mu_dd - b2) / std::max({1.0, std::abs(mu_dd), std::abs(b2)});
  return std::max(std::abs(r1), std::abs(r2));
}

}  // namespace igsmc
