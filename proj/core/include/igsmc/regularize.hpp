#pragma once

#include <Eigen/Cholesky>

#include "igsmc/types.hpp"

namespace igsmc {

struct RegularizedMatrix {
  Matrix matrix;          // input plus jitter * I
  Matrix lower;           // Cholesky factor of `matrix`
  double jitter = 0.0;
  bool singular = false;  // true whenever any jitter was needed
};

/// Adds the smallest jitter from {0, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2} * trace/D
/// (never below 1e-12 once nonzero) for which the Cholesky factor exists
/// and is numerically well conditioned. Throws SingularMetricError when the
/// largest jitter is not enough, ShapeError for non-square input.
RegularizedMatrix regularize(const Matrix& g);

/// Inverse of a regularized SPD matrix via its Cholesky factor.
Matrix spd_inverse(const RegularizedMatrix& r);

}  // namespace igsmc
