#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "igsmc/errors.hpp"
#include "igsmc/geodesic.hpp"

using namespace igsmc;

namespace {

// Closed-form Fisher-Rao distance between univariate normals: in
// (mu / sqrt 2, sigma) the metric is twice the hyperbolic half-plane.
double fisher_rao(const GaussianPoint& a, const GaussianPoint& b) {
  const double s1 = std::sqrt(a.var), s2 = std::sqrt(b.var);
  const double dm = a.mu - b.mu, ds = s1 - s2;
  return std::sqrt(2.0) * std::acosh(1.0 + (dm * dm / 2.0 + ds * ds) / (2.0 * s1 * s2));
}

std::vector<GaussianPoint> random_points(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> mu(-10, 10), lv(-4, 4);
  std::vector<GaussianPoint> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({mu(rng), std::exp(lv(rng))});
  return pts;
}

const GaussianPoint kStart{0.0, 1.0}, kEnd{5.0, 3.0};

}  // namespace

TEST(Canonical, Examples) {
  auto c = to_canonical(kStart);
  EXPECT_EQ(c.Delta, 1.0);
  EXPECT_EQ(c.delta, 0.0);
  c = to_canonical(kEnd);
  EXPECT_NEAR(c.Delta, 1.0 / 3, 1e-16);
  EXPECT_NEAR(c.delta, 5.0 / 3, 1e-15);
  EXPECT_THROW(to_canonical({0.0, 0.0}), DomainError);
  EXPECT_THROW(from_canonical({-1.0, 0.0}), DomainError);
}

TEST(Canonical, RoundTrip) {
  for (const auto& p : random_points(100, 1)) {
    const auto q = from_canonical(to_canonical(p));
    EXPECT_NEAR(q.mu, p.mu, 1e-14 * std::max(1.0, std::abs(p.mu)));
    EXPECT_NEAR(q.var, p.var, 1e-14 * p.var);
  }
}

TEST(OriginGeodesic, StartsAtOriginAndStaysValid) {
  const auto k = solve_RG(to_canonical(kEnd));
  EXPECT_LE(std::abs(k.R), 1.0);
  EXPECT_GT(k.G, 0.0);
  const auto o = geodesic_through_origin(k, 0.0);
  EXPECT_NEAR(o.Delta, 1.0, 1e-15);
  EXPECT_NEAR(o.delta, 0.0, 1e-15);
  for (int i = 0; i <= 1000; ++i) EXPECT_GT(geodesic_through_origin(k, i / 1000.0).Delta, 0.0);
}

TEST(OriginGeodesic, SolvedConstantsReachTheTarget) {
  for (const auto& p : random_points(100, 2)) {
    const auto c = to_canonical(p);
    const auto k = solve_RG(c);
    const auto e = geodesic_through_origin(k, 1.0);
    EXPECT_NEAR(e.Delta, c.Delta, 1e-10 * std::max(1.0, c.Delta));
    EXPECT_NEAR(e.delta, c.delta, 1e-10 * std::max(1.0, std::abs(c.delta)));
  }
}

TEST(OriginGeodesic, PureVarianceChange) {
  // along mu = 0 the metric is dvar^2 / (2 var^2), so log var is linear in t
  for (double s : {-2.0, -0.3, 0.5, 3.0}) {
    const GaussianPoint to{0.0, std::exp(s)};
    const Geodesic g(kStart, to);
    for (double t = 0; t <= 1.0; t += 0.05) {
      const auto p = g(t);
      EXPECT_NEAR(p.mu, 0.0, 1e-10);
      EXPECT_NEAR(std::log(p.var), s * t, 1e-10);
    }
  }
}

TEST(OriginGeodesic, MirroredTargets) {
  const Geodesic up(kStart, {2.0, 0.5}), down(kStart, {-2.0, 0.5});
  for (double t = 0; t <= 1.0; t += 0.1) {
    EXPECT_NEAR(up(t).mu, -down(t).mu, 1e-12);
    EXPECT_NEAR(up(t).var, down(t).var, 1e-12);
  }
}

TEST(Group, IdentityAndInverse) {
  const AffineGroupElement id{0.0, 1.0};
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> d(-5, 5), P(0.1, 4);
  for (const auto& p : random_points(100, 4)) {
    const auto q = group_act(id, p);
    EXPECT_EQ(q.mu, p.mu);
    EXPECT_EQ(q.var, p.var);
    const AffineGroupElement g{d(rng), P(rng)};
    const auto back = group_act(group_inverse(g), group_act(g, p));
    EXPECT_NEAR(back.mu, p.mu, 1e-14 * std::max(1.0, std::abs(p.mu)) * 10);
    EXPECT_NEAR(back.var, p.var, 1e-14 * p.var * 10);
    // both charts agree
    const auto c = from_canonical(group_act(g, to_canonical(p)));
    const auto m = group_act(g, p);
    EXPECT_NEAR(c.mu, m.mu, 1e-12 * std::max(1.0, std::abs(m.mu)));
    EXPECT_NEAR(c.var, m.var, 1e-12 * m.var);
  }
}

TEST(Group, ActionPreservesFisherLength) {
  const AffineGroupElement g{-3.0, 2.5};
  for (const auto& path : {straight_line_path(kStart, kEnd, 400), two_stage_path(kStart, kEnd, 400)}) {
    GaussianPath moved;
    for (const auto& p : path) moved.push_back(group_act(g, p));
    EXPECT_NEAR(fisher_length(moved), fisher_length(path), 1e-8 * fisher_length(path));
  }
}

TEST(Paths, EndpointsAndPositivity) {
  for (const auto& path : {geodesic_between(kStart, kEnd, 25), straight_line_path(kStart, kEnd, 25),
                           two_stage_path(kStart, kEnd, 25)}) {
    ASSERT_EQ(path.size(), 25u);
    EXPECT_NEAR(path.front().mu, 0.0, 1e-10);
    EXPECT_NEAR(path.front().var, 1.0, 1e-10);
    EXPECT_NEAR(path.back().mu, 5.0, 1e-10);
    EXPECT_NEAR(path.back().var, 3.0, 1e-10);
    for (const auto& p : path) EXPECT_GT(p.var, 0.0);
  }
  for (const auto& [a, b] : {std::pair{GaussianPoint{1, 2}, GaussianPoint{-4, 0.1}},
                            std::pair{GaussianPoint{3, 9}, GaussianPoint{3.5, 8}}}) {
    const auto path = geodesic_between(a, b, 7);
    EXPECT_NEAR(path.front().mu, a.mu, 1e-10);
    EXPECT_NEAR(path.front().var, a.var, 1e-10);
    EXPECT_NEAR(path.back().mu, b.mu, 1e-10);
    EXPECT_NEAR(path.back().var, b.var, 1e-10);
  }
}

TEST(Paths, ComparisonPathShapes) {
  const auto mid = straight_line_at(kStart, kEnd, 0.5);
  EXPECT_DOUBLE_EQ(mid.mu, 2.5);
  EXPECT_DOUBLE_EQ(mid.var, 2.0);
  const auto half = two_stage_at(kStart, kEnd, 0.5);
  EXPECT_DOUBLE_EQ(half.mu, 5.0);
  EXPECT_DOUBLE_EQ(half.var, 1.0);
}

TEST(Paths, ConstantWhenEndpointsCoincide) {
  const GaussianPoint p{1.5, 0.7};
  EXPECT_TRUE(Geodesic(p, p).is_constant());
  for (const auto& q : geodesic_between(p, p, 5)) {
    EXPECT_EQ(q.mu, p.mu);
    EXPECT_EQ(q.var, p.var);
  }
}

TEST(Paths, ReversalSymmetry) {
  for (const auto& [a, b] : {std::pair{kStart, kEnd}, std::pair{GaussianPoint{-2, 0.3}, GaussianPoint{4, 5}}}) {
    const auto fwd = geodesic_between(a, b, 25);
    const auto rev = geodesic_between(b, a, 25);
    for (std::size_t i = 0; i < 25; ++i) {
      EXPECT_NEAR(fwd[i].mu, rev[24 - i].mu, 1e-8);
      EXPECT_NEAR(fwd[i].var, rev[24 - i].var, 1e-8);
    }
  }
}

TEST(Paths, GeodesicIsShortest) {
  const Geodesic g(kStart, kEnd);
  const double lg = fisher_length([&](double t) { return g(t); });
  const double ls = fisher_length([&](double t) { return straight_line_at(kStart, kEnd, t); });
  const double l2 = fisher_length([&](double t) { return two_stage_at(kStart, kEnd, t); });
  EXPECT_LT(lg, ls);
  EXPECT_LT(lg, l2);
  EXPECT_NEAR(lg, fisher_rao(kStart, kEnd), 1e-6);
  for (const auto& p : random_points(20, 5)) {
    const Geodesic h(kStart, p);
    EXPECT_NEAR(fisher_length([&](double t) { return h(t); }), fisher_rao(kStart, p),
                1e-6 * std::max(1.0, fisher_rao(kStart, p)));
  }
}

TEST(Paths, GeodesicEquationResidual) {
  const Geodesic g(kStart, kEnd);
  const CurveFn c = [&](double t) { return g(t); };
  for (int i = 1; i < 100; ++i) EXPECT_LT(geodesic_residual(c, i / 100.0), 1e-6);
  // a straight line is not a geodesic
  EXPECT_GT(geodesic_residual([&](double t) { return straight_line_at(kStart, kEnd, t); }, 0.5), 1e-2);
  for (const auto& p : random_points(10, 6)) {
    const Geodesic h({1.0, 0.5}, p);
    for (int i = 1; i < 20; ++i) EXPECT_LT(geodesic_residual([&](double t) { return h(t); }, i / 20.0), 1e-6);
  }
}

TEST(KlRelation, Examples) {
  auto k = kl_vs_metric_check(kStart, Vector::Zero(2));
  EXPECT_EQ(k.kl, 0.0);
  EXPECT_EQ(k.half_ds2, 0.0);
  k = kl_vs_metric_check(kStart, Vector{{1e-3, 0.0}});
  EXPECT_LT(std::abs(k.kl - 0.5e-6) / 0.5e-6, 1e-3);
  const Vector d{{0.05, 0.08}};
  const auto a = kl_vs_metric_check({1.0, 2.0}, d), b = kl_vs_metric_check({1.0, 2.0}, d / 2);
  EXPECT_NEAR(std::abs(a.kl - a.half_ds2) / std::abs(b.kl - b.half_ds2), 8.0, 0.5);
}

TEST(Christoffel, UnivariateNormalInMuSigma) {
  const MetricFn g = [](const Vector& x) {
    return Matrix(Vector{{1 / (x[1] * x[1]), 2 / (x[1] * x[1])}}.asDiagonal());
  };
  const MetricDerivativeFn dg = [](const Vector& x) {
    Tensor3 t(2, 2, 2);
    t(1, 0, 0) = -2 / std::pow(x[1], 3);
    t(1, 1, 1) = -4 / std::pow(x[1], 3);
    return t;
  };
  for (double s : {0.5, 1.0, 3.0}) {
    const auto gam = christoffel(g, dg, Vector{{0.3, s}});
    EXPECT_NEAR(gam(0, 0, 1), -1 / s, 1e-14);
    EXPECT_NEAR(gam(1, 0, 0), 1 / (2 * s), 1e-14);
    EXPECT_NEAR(gam(1, 1, 1), -1 / s, 1e-14);
    EXPECT_NEAR(gam(0, 0, 0), 0.0, 1e-15);
    EXPECT_NEAR(gam(0, 1, 1), 0.0, 1e-15);
    EXPECT_NEAR(gam(1, 0, 1), 0.0, 1e-15);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j)
        for (int k = 0; k < 2; ++k) EXPECT_EQ(gam(i, j, k), gam(i, k, j));
  }
  const auto zero = christoffel([](const Vector&) { return Matrix(Matrix::Identity(2, 2)); },
                                [](const Vector&) { return Tensor3(2, 2, 2); }, Vector::Zero(2));
  for (double v : zero.data()) EXPECT_EQ(v, 0.0);
  EXPECT_THROW(christoffel([](const Vector&) { return Matrix(Matrix::Zero(2, 2)); },
                           [](const Vector&) { return Tensor3(2, 2, 2); }, Vector::Zero(2)),
               SingularMetricError);
}
