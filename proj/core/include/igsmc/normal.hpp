#pragma once

namespace igsmc::normal {

double pdf(double z);
double log_pdf(double z);
double cdf(double z);

/// log Phi(z). Below z = -8 the Mills ratio is evaluated with its continued
/// fraction, so the result stays accurate far past the point where Phi(z)
/// underflows.
double log_cdf(double z);

/// Mills ratio Phi(-x) / phi(x).
double mills_ratio(double x);

/// Hazard lambda(z) = phi(z) / Phi(z); tends to -z as z -> -inf and to 0 as z -> inf.
double hazard(double z);

/// d lambda / dz = -lambda (z + lambda).
double hazard_derivative(double z);

/// log(Phi(b) - Phi(a)) for a < b, without cancellation in either tail.
double log_interval_probability(double a, double b);

/// Phi(b) - Phi(a) for a < b, evaluated in the tail that avoids cancellation.
double interval_probability(double a, double b);

}  // namespace igsmc::normal
