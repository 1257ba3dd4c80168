#include "igsmc/normal.hpp"

#include <cmath>
#include <numbers>

namespace igsmc::normal {

namespace {
constexpr double kInvSqrt2Pi = 0.3989422804014326779399460599343818684758586311649;
constexpr double kLogSqrt2Pi = 0.9189385332046727417803297364056176398613974736378;
constexpr double kTailSwitch = 8.0;
constexpr int kFractionDepth = 120;
}  // namespace

double pdf(double z) { return kInvSqrt2Pi * std::exp(-0.5 * z * z); }

double log_pdf(double z) { return -0.5 * z * z - kLogSqrt2Pi; }

double cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double mills_ratio(double x) {
  if (std::isinf(x)) return x > 0 ? 0.0 : std::numeric_limits<double>::infinity();
  if (x < kTailSwitch) return cdf(-x) / pdf(x);
  // R(x) = 1 / (x + 1/(x + 2/(x + 3/(x + ...)))), evaluated bottom-up.
  double t = x;
  for (int k = kFractionDepth; k >= 1; --k) t = x + k / t;
  return 1.0 / t;
}

double log_cdf(double z) {
  if (z == -std::numeric_limits<double>::infinity()) return z;
  if (z > 0.0) return std::log1p(-cdf(-z));
  if (z >= -kTailSwitch) return std::log(cdf(z));
  return log_pdf(z) + std::log(mills_ratio(-z));
}

double hazard(double z) {
  if (z == std::numeric_limits<double>::infinity()) return 0.0;
  if (z < -kTailSwitch) return 1.0 / mills_ratio(-z);
  return pdf(z) / cdf(z);
}

double hazard_derivative(double z) {
  const double lam = hazard(z);
  if (lam == 0.0) return 0.0;
  return -lam * (z + lam);
}

double log_interval_probability(double a, double b) {
  if (!(a < b)) return -std::numeric_limits<double>::infinity();
  if (a >= 0.0) {
    // Upper tail: Phi(b) - Phi(a) = Phi(-a) - Phi(-b).
    const double hi = log_cdf(-a);
    const double lo = log_cdf(-b);
    return hi + std::log1p(-std::exp(lo - hi));
  }
  if (b <= 0.0) {
    const double hi = log_cdf(b);
    const double lo = log_cdf(a);
    return hi + std::log1p(-std::exp(lo - hi));
  }
  return std::log1p(-(cdf(a) + cdf(-b)));
}

double interval_probability(double a, double b) {
  return std::exp(log_interval_probability(a, b));
}

}  // namespace igsmc::normal
