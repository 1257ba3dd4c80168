#include <cmath>

#include "igsmc/errors.hpp"
#include "igsmc/ode.hpp"

namespace igsmc {

namespace {

// Symmetric setters: the tensors hold every permutation of the symmetric slots.
void set_xx(Tensor3& t, int d, int e, int g, double v) {
  t(d, e, g) = v;
  t(d, g, e) = v;
}
void set_pp(Tensor3& t, int d, int i, int j, double v) {
  t(d, i, j) = v;
  t(d, j, i) = v;
}
void set_xxp(Tensor4& t, int d, int e, int g, int i, double v) {
  t(d, e, g, i) = v;
  t(d, g, e, i) = v;
}
void set_xpp(Tensor4& t, int d, int e, int i, int j, double v) {
  t(d, e, i, j) = v;
  t(d, e, j, i) = v;
}
void set_ppp(Tensor4& t, int d, int i, int j, int k, double v) {
  t(d, i, j, k) = v;
  t(d, i, k, j) = v;
  t(d, j, i, k) = v;
  t(d, j, k, i) = v;
  t(d, k, i, j) = v;
  t(d, k, j, i) = v;
}

// x = (V, R), xi = (a, b, c).
class FitzhughNagumo final : public OdeSystem {
 public:
  std::size_t state_dim() const override { return 2; }
  std::size_t param_dim() const override { return 3; }
  int max_partial_order() const override { return 3; }

  void validate(const Vector& xi) const override {
    if (xi.size() != 3) throw ShapeError("Fitzhugh-Nagumo takes (a, b, c)");
    if (xi[2] == 0.0) throw DomainError("Fitzhugh-Nagumo is singular at c = 0");
  }

  void rhs(const double* x, const Vector& xi, double, double* dxdt) const override {
    const double V = x[0], R = x[1];
    const double a = xi[0], b = xi[1], c = xi[2];
    if (c == 0.0) throw DomainError("Fitzhugh-Nagumo is singular at c = 0");
    dxdt[0] = c * (V - V * V * V / 3.0 + R);
    dxdt[1] = (a - V - b * R) / c;
  }

  void partials(const double* x, const Vector& xi, double, int order,
                OdePartials& p) const override {
    enum { V_ = 0, R_ = 1, A = 0, B = 1, C = 2 };
    const double V = x[0], R = x[1];
    const double a = xi[0], b = xi[1], c = xi[2];
    if (c == 0.0) throw DomainError("Fitzhugh-Nagumo is singular at c = 0");
    const double c2 = c * c, c3 = c2 * c;
    const double w = a - V - b * R;

    p.fx(V_, V_) = c * (1.0 - V * V);
    p.fx(V_, R_) = c;
    p.fx(R_, V_) = -1.0 / c;
    p.fx(R_, R_) = -b / c;
    p.fp(V_, C) = V - V * V * V / 3.0 + R;
    p.fp(R_, A) = 1.0 / c;
    p.fp(R_, B) = -R / c;
    p.fp(R_, C) = -w / c2;
    if (order < 2) return;

    set_xx(p.fxx, V_, V_, V_, -2.0 * c * V);
    p.fxp(V_, V_, C) = 1.0 - V * V;
    p.fxp(V_, R_, C) = 1.0;
    p.fxp(R_, V_, C) = 1.0 / c2;
    p.fxp(R_, R_, B) = -1.0 / c;
    p.fxp(R_, R_, C) = b / c2;
    set_pp(p.fpp, R_, A, C, -1.0 / c2);
    set_pp(p.fpp, R_, B, C, R / c2);
    set_pp(p.fpp, R_, C, C, 2.0 * w / c3);
    if (order < 3) return;

    p.fxxx(V_, V_, V_, V_) = -2.0 * c;
    set_xxp(p.fxxp, V_, V_, V_, C, -2.0 * V);
    set_xpp(p.fxpp, R_, V_, C, C, -2.0 / c3);
    set_xpp(p.fxpp, R_, R_, B, C, 1.0 / c2);
    set_xpp(p.fxpp, R_, R_, C, C, -2.0 * b / c3);
    set_ppp(p.fppp, R_, C, C, C, -6.0 * w / (c3 * c));
    set_ppp(p.fppp, R_, A, C, C, 2.0 / c3);
    set_ppp(p.fppp, R_, B, C, C, -2.0 * R / c3);
  }

  std::vector<std::string> state_names() const override { return {"V", "R"}; }
  std::vector<std::string> param_names() const override { return {"a", "b", "c"}; }
};

// x = (prey, predator), xi = (alpha, beta, gamma, delta).
class LotkaVolterra final : public OdeSystem {
 public:
  std::size_t state_dim() const override { return 2; }
  std::size_t param_dim() const override { return 4; }
  int max_partial_order() const override { return 3; }

  void validate(const Vector& xi) const override {
    if (xi.size() != 4) throw ShapeError("Lotka-Volterra takes (alpha, beta, gamma, delta)");
  }

  void rhs(const double* x, const Vector& xi, double, double* dxdt) const override {
    dxdt[0] = x[0] * (xi[0] - xi[1] * x[1]);
    dxdt[1] = -x[1] * (xi[2] - xi[3] * x[0]);
  }

  void partials(const double* x, const Vector& xi, double, int order,
                OdePartials& p) const override {
    enum { X = 0, Y = 1, AL = 0, BE = 1, GA = 2, DE = 3 };
    const double px = x[0], py = x[1];
    const double alpha = xi[0], beta = xi[1], gamma = xi[2], delta = xi[3];

    p.fx(X, X) = alpha - beta * py;
    p.fx(X, Y) = -beta * px;
    p.fx(Y, X) = delta * py;
    p.fx(Y, Y) = -(gamma - delta * px);
    p.fp(X, AL) = px;
    p.fp(X, BE) = -px * py;
    p.fp(Y, GA) = -py;
    p.fp(Y, DE) = px * py;
    if (order < 2) return;

    set_xx(p.fxx, X, X, Y, -beta);
    set_xx(p.fxx, Y, X, Y, delta);
    p.fxp(X, X, AL) = 1.0;
    p.fxp(X, X, BE) = -py;
    p.fxp(X, Y, BE) = -px;
    p.fxp(Y, Y, GA) = -1.0;
    p.fxp(Y, X, DE) = py;
    p.fxp(Y, Y, DE) = px;
    if (order < 3) return;

    set_xxp(p.fxxp, X, X, Y, BE, -1.0);
    set_xxp(p.fxxp, Y, X, Y, DE, 1.0);
  }

  std::vector<std::string> state_names() const override { return {"prey", "predator"}; }
  std::vector<std::string> param_names() const override {
    return {"alpha", "beta", "gamma", "delta"};
  }
};

}  // namespace

std::shared_ptr<const OdeSystem> fitzhugh_nagumo_system() {
  static const auto instance = std::make_shared<const FitzhughNagumo>();
  return instance;
}

std::shared_ptr<const OdeSystem> lotka_volterra_system() {
  static const auto instance = std::make_shared<const LotkaVolterra>();
  return instance;
}

}  // namespace igsmc
