#include "igsmc/ode.hpp"

#include <cmath>
#include <stdexcept>

#include <boost/numeric/odeint.hpp>

#include "igsmc/errors.hpp"

namespace igsmc {

namespace odeint = boost::numeric::odeint;

void OdePartials::resize(std::size_t dx, std::size_t dp, int order) {
  fx = Matrix::Zero(dx, dx);
  fp = Matrix::Zero(dx, dp);
  if (order >= 2) {
    fxx = Tensor3(dx, dx, dx);
    fxp = Tensor3(dx, dx, dp);
    fpp = Tensor3(dx, dp, dp);
  }
  if (order >= 3) {
    fxxx = Tensor4(dx, dx, dx, dx);
    fxxp = Tensor4(dx, dx, dx, dp);
    fxpp = Tensor4(dx, dx, dp, dp);
    fppp = Tensor4(dx, dp, dp, dp);
  }
}

void OdePartials::set_zero() {
  fx.setZero();
  fp.setZero();
  fxx.set_zero();
  fxp.set_zero();
  fpp.set_zero();
  fxxx.set_zero();
  fxxp.set_zero();
  fxpp.set_zero();
  fppp.set_zero();
}

std::vector<std::string> OdeSystem::state_names() const {
  std::vector<std::string> out;
  for (std::size_t d = 0; d < state_dim(); ++d) out.push_back("x" + std::to_string(d + 1));
  return out;
}

std::vector<std::string> OdeSystem::param_names() const {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < param_dim(); ++i) out.push_back("xi" + std::to_string(i + 1));
  return out;
}

CallbackSystem::CallbackSystem(std::size_t state_dim, std::size_t param_dim, int max_order,
                               RhsFn rhs, PartialsFn partials)
    : dx_(state_dim), dp_(param_dim), order_(max_order), rhs_(std::move(rhs)),
      partials_(std::move(partials)) {
  if (!rhs_) throw ConfigurationError("callback system needs a right-hand side");
  if (order_ > 0 && !partials_) throw ConfigurationError("callback system needs partials");
}

SensitivityState::SensitivityState(std::vector<double> times, std::size_t dx, std::size_t dp,
                                   int order)
    : times_(std::move(times)), dx_(dx), dp_(dp), order_(order) {
  const std::size_t n = times_.size();
  X_.assign(n * dx, 0.0);
  if (order >= 1) S_.assign(n * dp * dx, 0.0);
  if (order >= 2) dS_.assign(n * dp * dp * dx, 0.0);
  if (order >= 3) ddS_.assign(n * dp * dp * dp * dx, 0.0);
}

Matrix SensitivityState::states() const {
  Matrix m(times_.size(), dx_);
  for (std::size_t t = 0; t < times_.size(); ++t)
    for (std::size_t d = 0; d < dx_; ++d) m(t, d) = X(t, d);
  return m;
}

std::size_t augmented_size(std::size_t dx, std::size_t dp, int order) {
  std::size_t n = dx, block = dx;
  for (int o = 1; o <= order; ++o) {
    block *= dp;
    n += block;
  }
  return n;
}

std::size_t SensitivityState::packed_size() const { return augmented_size(dx_, dp_, order_); }

void SensitivityState::store(std::size_t t, const double* y) {
  std::copy(y, y + dx_, X_.begin() + t * dx_);
  y += dx_;
  if (order_ >= 1) {
    const std::size_t n = dp_ * dx_;
    std::copy(y, y + n, S_.begin() + t * n);
    y += n;
  }
  if (order_ >= 2) {
    const std::size_t n = dp_ * dp_ * dx_;
    std::copy(y, y + n, dS_.begin() + t * n);
    y += n;
  }
  if (order_ >= 3) {
    const std::size_t n = dp_ * dp_ * dp_ * dx_;
    std::copy(y, y + n, ddS_.begin() + t * n);
  }
}

void augmented_rhs(const OdeSystem& system, const Vector& xi, int order, double t,
                   const double* y, double* dydt, OdePartials& p) {
  const std::size_t dx = system.state_dim();
  const std::size_t dp = system.param_dim();
  system.rhs(y, xi, t, dydt);
  if (order == 0) return;

  p.set_zero();
  system.partials(y, xi, t, order, p);

  const double* S = y + dx;
  double* dS_dt = dydt + dx;
  auto s = [&](std::size_t i, std::size_t d) { return S[i * dx + d]; };
  for (std::size_t i = 0; i < dp; ++i)
    for (std::size_t d = 0; d < dx; ++d) {
      double v = p.fp(d, i);
      for (std::size_t e = 0; e < dx; ++e) v += p.fx(d, e) * s(i, e);
      dS_dt[i * dx + d] = v;
    }
  if (order == 1) return;

  const double* dS = S + dp * dx;
  double* ddS_dt = dS_dt + dp * dx;
  auto ds = [&](std::size_t k, std::size_t i, std::size_t d) { return dS[(k * dp + i) * dx + d]; };

  // A_k(d, e) = D_k fx(d, e), B_k(d, i) = D_k fp(d, i), where
  // D_k = d/dxi_k + S_{k,h} d/dx_h is the total derivative along xi_k.
  Tensor3 A(dp, dx, dx), B(dp, dx, dp);
  for (std::size_t k = 0; k < dp; ++k)
    for (std::size_t d = 0; d < dx; ++d) {
      for (std::size_t e = 0; e < dx; ++e) {
        double v = p.fxp(d, e, k);
        for (std::size_t h = 0; h < dx; ++h) v += p.fxx(d, e, h) * s(k, h);
        A(k, d, e) = v;
      }
      for (std::size_t i = 0; i < dp; ++i) {
        double v = p.fpp(d, i, k);
        for (std::size_t g = 0; g < dx; ++g) v += p.fxp(d, g, i) * s(k, g);
        B(k, d, i) = v;
      }
    }
  for (std::size_t k = 0; k < dp; ++k)
    for (std::size_t i = 0; i < dp; ++i)
      for (std::size_t d = 0; d < dx; ++d) {
        double v = B(k, d, i);
        for (std::size_t e = 0; e < dx; ++e) v += A(k, d, e) * s(i, e) + p.fx(d, e) * ds(k, i, e);
        ddS_dt[(k * dp + i) * dx + d] = v;
      }
  if (order == 2) return;

  const double* ddS = dS + dp * dp * dx;
  double* dddS_dt = ddS_dt + dp * dp * dx;
  auto dds = [&](std::size_t j, std::size_t k, std::size_t i, std::size_t d) {
    return ddS[((j * dp + k) * dp + i) * dx + d];
  };
  // C_j = D_j fxx, E_j = D_j fxp, F_j = D_j fpp.
  Tensor4 C(dp, dx, dx, dx), E(dp, dx, dx, dp), F(dp, dx, dp, dp);
  for (std::size_t j = 0; j < dp; ++j)
    for (std::size_t d = 0; d < dx; ++d) {
      for (std::size_t e = 0; e < dx; ++e) {
        for (std::size_t h = 0; h < dx; ++h) {
          double v = p.fxxp(d, e, h, j);
          for (std::size_t m = 0; m < dx; ++m) v += p.fxxx(d, e, h, m) * s(j, m);
          C(j, d, e, h) = v;
        }
        for (std::size_t k = 0; k < dp; ++k) {
          double v = p.fxpp(d, e, k, j);
          for (std::size_t m = 0; m < dx; ++m) v += p.fxxp(d, e, m, k) * s(j, m);
          E(j, d, e, k) = v;
        }
      }
      for (std::size_t i = 0; i < dp; ++i)
        for (std::size_t k = 0; k < dp; ++k) {
          double v = p.fppp(d, i, k, j);
          for (std::size_t m = 0; m < dx; ++m) v += p.fxpp(d, m, i, k) * s(j, m);
          F(j, d, i, k) = v;
        }
    }
  for (std::size_t j = 0; j < dp; ++j)
    for (std::size_t k = 0; k < dp; ++k)
      for (std::size_t i = 0; i < dp; ++i)
        for (std::size_t d = 0; d < dx; ++d) {
          // D_j B_k(d, i)
          double v = F(j, d, i, k);
          for (std::size_t g = 0; g < dx; ++g)
            v += E(j, d, g, i) * s(k, g) + p.fxp(d, g, i) * ds(j, k, g);
          for (std::size_t e = 0; e < dx; ++e) {
            // D_j A_k(d, e)
            double djak = E(j, d, e, k);
            for (std::size_t h = 0; h < dx; ++h)
              djak += C(j, d, e, h) * s(k, h) + p.fxx(d, e, h) * ds(j, k, h);
            v += djak * s(i, e) + A(k, d, e) * ds(j, i, e) + A(j, d, e) * ds(k, i, e) +
                 p.fx(d, e) * dds(j, k, i, e);
          }
          dddS_dt[((j * dp + k) * dp + i) * dx + d] = v;
        }
}

namespace {

using State = std::vector<double>;

struct AugmentedSystem {
  const OdeSystem* system;
  const Vector* xi;
  int order;
  OdePartials* scratch;
  double* last_time;

  void operator()(const State& y, State& dydt, double t) const {
    *last_time = t;
    for (double v : y)
      if (!std::isfinite(v)) throw IntegrationError("non-finite state", t);
    augmented_rhs(*system, *xi, order, t, y.data(), dydt.data(), *scratch);
    for (double v : dydt)
      if (!std::isfinite(v)) throw IntegrationError("non-finite derivative", t);
  }
};

void check_times(const std::vector<double>& times, double t0) {
  if (times.empty()) throw ConfigurationError("no observation times");
  if (times.front() < t0) throw ConfigurationError("observation before the initial time");
  for (std::size_t k = 1; k < times.size(); ++k)
    if (!(times[k] > times[k - 1]))
      throw ConfigurationError("observation times must be strictly increasing");
}

}  // namespace

SensitivityState integrate_with_sensitivities(const OdeSystem& system, const Vector& x0,
                                              const Vector& xi, const std::vector<double>& times,
                                              int order, const IntegratorOptions& options) {
  const std::size_t dx = system.state_dim();
  const std::size_t dp = system.param_dim();
  if (static_cast<std::size_t>(x0.size()) != dx) throw ShapeError("initial state dimension");
  if (static_cast<std::size_t>(xi.size()) != dp) throw ShapeError("parameter dimension");
  if (order < 0 || order > 3) throw ConfigurationError("sensitivity order must be 0..3");
  if (order > system.max_partial_order())
    throw CapabilityError("system does not provide partials of order " + std::to_string(order));
  check_times(times, options.t0);
  system.validate(xi);

  SensitivityState out(times, dx, dp, order);
  State y(augmented_size(dx, dp, order), 0.0);
  for (std::size_t d = 0; d < dx; ++d) y[d] = x0[d];

  OdePartials scratch;
  scratch.resize(dx, dp, order);
  double last_time = options.t0;
  AugmentedSystem rhs{&system, &xi, order, &scratch, &last_time};

  std::vector<double> grid;
  grid.reserve(times.size() + 1);
  const bool prepend = times.front() > options.t0;
  if (prepend) grid.push_back(options.t0);
  grid.insert(grid.end(), times.begin(), times.end());

  std::size_t k = 0;
  auto observer = [&](const State& state, double) {
    if (prepend && k == 0) {
      ++k;
      return;
    }
    out.store(k - (prepend ? 1 : 0), state.data());
    ++k;
  };
  try {
    auto stepper =
        odeint::make_dense_output(options.atol, options.rtol, odeint::runge_kutta_dopri5<State>());
    odeint::integrate_times(stepper, rhs, y, grid.begin(), grid.end(), options.initial_step,
                            observer, odeint::max_step_checker(options.max_steps));
  } catch (const IntegrationError&) {
    throw;
  } catch (const std::exception& ex) {
    throw IntegrationError(std::string("integrator failure: ") + ex.what(), last_time);
  }
  if (k != grid.size()) throw IntegrationError("integration stopped early", last_time);
  return out;
}

Trajectory integrate(const OdeSystem& system, const Vector& x0, const Vector& xi,
                     const std::vector<double>& times, const IntegratorOptions& options) {
  const auto s = integrate_with_sensitivities(system, x0, xi, times, 0, options);
  return {s.times(), s.states()};
}

}  // namespace igsmc
