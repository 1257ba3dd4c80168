#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "igsmc/types.hpp"

namespace igsmc {

/// Partial derivatives of f(x, xi, t) at one point. Index order is
/// (output component, then state indices, then parameter indices), e.g.
/// fxp(d, e, i) = d^2 f_d / dx_e dxi_i. Tensors are filled symmetrically.
struct OdePartials {
  Matrix fx;    // Dx x Dx
  Matrix fp;    // Dx x Dp
  Tensor3 fxx;  // (d, e, g)
  Tensor3 fxp;  // (d, e, i)
  Tensor3 fpp;  // (d, i, j)
  Tensor4 fxxx;
  Tensor4 fxxp;  // (d, e, g, i)
  Tensor4 fxpp;  // (d, e, i, j)
  Tensor4 fppp;

  void resize(std::size_t dx, std::size_t dp, int order);
  void set_zero();
};

/// dx/dt = f(x, xi, t) with analytic partial derivatives.
class OdeSystem {
 public:
  virtual ~OdeSystem() = default;

  virtual std::size_t state_dim() const = 0;
  virtual std::size_t param_dim() const = 0;
  /// Highest sensitivity order the partials support (1, 2 or 3). Order n
  /// needs all partials of total degree <= n.
  virtual int max_partial_order() const = 0;

  virtual void rhs(const double* x, const Vector& xi, double t, double* dxdt) const = 0;
  /// Fills the partials needed by sensitivities of `order`; `out` is sized
  /// and zeroed by the caller.
  virtual void partials(const double* x, const Vector& xi, double t, int order,
                        OdePartials& out) const = 0;

  /// Throws DomainError for parameters at which f is undefined.
  virtual void validate(const Vector&) const {}

  virtual std::vector<std::string> state_names() const;
  virtual std::vector<std::string> param_names() const;
};

std::shared_ptr<const OdeSystem> fitzhugh_nagumo_system();
std::shared_ptr<const OdeSystem> lotka_volterra_system();

/// A system assembled from callbacks, for user-defined dynamics.
class CallbackSystem final : public OdeSystem {
 public:
  using RhsFn = std::function<void(const double*, const Vector&, double, double*)>;
  using PartialsFn = std::function<void(const double*, const Vector&, double, int, OdePartials&)>;

  CallbackSystem(std::size_t state_dim, std::size_t param_dim, int max_order, RhsFn rhs,
                 PartialsFn partials);

  std::size_t state_dim() const override { return dx_; }
  std::size_t param_dim() const override { return dp_; }
  int max_partial_order() const override { return order_; }
  void rhs(const double* x, const Vector& xi, double t, double* dxdt) const override {
    rhs_(x, xi, t, dxdt);
  }
  void partials(const double* x, const Vector& xi, double t, int order,
                OdePartials& out) const override {
    partials_(x, xi, t, order, out);
  }

 private:
  std::size_t dx_, dp_;
  int order_;
  RhsFn rhs_;
  PartialsFn partials_;
};

struct IntegratorOptions {
  double rtol = 1e-8;
  double atol = 1e-10;
  double t0 = 0.0;
  double initial_step = 1e-3;
  std::size_t max_steps = 100000;  // per observation interval
};

struct Trajectory {
  std::vector<double> times;
  Matrix states;  // tau x Dx
};

/// State and forward sensitivities at the observation times.
/// S(t, i, d) = dX_d / dxi_i, dS(t, k, i, d) = d_k S_{i,d},
/// ddS(t, j, k, i, d) = d_j d_k S_{i,d}.
class SensitivityState {
 public:
  SensitivityState() = default;
  SensitivityState(std::vector<double> times, std::size_t dx, std::size_t dp, int order);

  std::size_t num_times() const { return times_.size(); }
  std::size_t state_dim() const { return dx_; }
  std::size_t param_dim() const { return dp_; }
  int order() const { return order_; }
  const std::vector<double>& times() const { return times_; }

  double& X(std::size_t t, std::size_t d) { return X_[t * dx_ + d]; }
  double X(std::size_t t, std::size_t d) const { return X_[t * dx_ + d]; }
  double& S(std::size_t t, std::size_t i, std::size_t d) { return S_[(t * dp_ + i) * dx_ + d]; }
  double S(std::size_t t, std::size_t i, std::size_t d) const { return S_[(t * dp_ + i) * dx_ + d]; }
  double& dS(std::size_t t, std::size_t k, std::size_t i, std::size_t d) {
    return dS_[((t * dp_ + k) * dp_ + i) * dx_ + d];
  }
  double dS(std::size_t t, std::size_t k, std::size_t i, std::size_t d) const {
    return dS_[((t * dp_ + k) * dp_ + i) * dx_ + d];
  }
  double& ddS(std::size_t t, std::size_t j, std::size_t k, std::size_t i, std::size_t d) {
    return ddS_[(((t * dp_ + j) * dp_ + k) * dp_ + i) * dx_ + d];
  }
  double ddS(std::size_t t, std::size_t j, std::size_t k, std::size_t i, std::size_t d) const {
    return ddS_[(((t * dp_ + j) * dp_ + k) * dp_ + i) * dx_ + d];
  }

  Matrix states() const;
  /// Copies one observation time out of a packed augmented state vector.
  void store(std::size_t t, const double* packed);
  std::size_t packed_size() const;

 private:
  std::vector<double> times_;
  std::size_t dx_ = 0, dp_ = 0;
  int order_ = 0;
  std::vector<double> X_, S_, dS_, ddS_;
};

Trajectory integrate(const OdeSystem& system, const Vector& x0, const Vector& xi,
                     const std::vector<double>& times, const IntegratorOptions& options = {});

/// order 0 integrates only the state.
SensitivityState integrate_with_sensitivities(const OdeSystem& system, const Vector& x0,
                                              const Vector& xi, const std::vector<double>& times,
                                              int order, const IntegratorOptions& options = {});

/// Size of the augmented state for a given sensitivity order.
std::size_t augmented_size(std::size_t dx, std::size_t dp, int order);

/// Right-hand side of the augmented (state + sensitivity) system.
void augmented_rhs(const OdeSystem& system, const Vector& xi, int order, double t,
                   const double* y, double* dydt, OdePartials& scratch);

}  // namespace igsmc
