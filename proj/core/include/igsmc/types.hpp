#pragma once

#include <array>
#include <cstddef>
#include <limits>
#include <numeric>
#include <vector>

#include <Eigen/Dense>

namespace igsmc {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

/// Dense row-major array of fixed rank. Used for metric derivatives
/// (rank 3) and third-order ODE partials (rank 4); dimensions are tiny.
template <std::size_t Rank>
class Tensor {
 public:
  Tensor() { dims_.fill(0); }

  template <typename... Dims>
    requires(sizeof...(Dims) == Rank)
  explicit Tensor(Dims... dims) : dims_{static_cast<std::size_t>(dims)...} {
    data_.assign(std::accumulate(dims_.begin(), dims_.end(), std::size_t{1},
                                 std::multiplies<>()),
                 0.0);
  }

  template <typename... Idx>
    requires(sizeof...(Idx) == Rank)
  double& operator()(Idx... idx) {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  template <typename... Idx>
    requires(sizeof...(Idx) == Rank)
  double operator()(Idx... idx) const {
    return data_[offset({static_cast<std::size_t>(idx)...})];
  }

  std::size_t dim(std::size_t r) const { return dims_[r]; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  const std::vector<double>& data() const { return data_; }
  std::vector<double>& data() { return data_; }

  void set_zero() { std::fill(data_.begin(), data_.end(), 0.0); }

  Tensor& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }
  Tensor& operator+=(const Tensor& other) {
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
  }

 private:
  std::size_t offset(const std::array<std::size_t, Rank>& idx) const {
    std::size_t off = 0;
    for (std::size_t r = 0; r < Rank; ++r) off = off * dims_[r] + idx[r];
    return off;
  }

  std::array<std::size_t, Rank> dims_;
  std::vector<double> data_;
};

using Tensor3 = Tensor<3>;
using Tensor4 = Tensor<4>;

}  // namespace igsmc
