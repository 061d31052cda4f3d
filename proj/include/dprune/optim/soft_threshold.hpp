#pragma once

#include <dprune/error.hpp>

#include <Eigen/Core>

#include <cmath>

namespace dprune {

/// S_g(v) = sgn(v) (|v| - g)_+, the l1 proximal map. With g == 0 this
/// returns v bit-for-bit (apart from the sign of a zero).
template <typename Scalar>
Scalar soft_threshold(Scalar v, Scalar g) {
  const Scalar excess = std::abs(v) - g;
  return excess > Scalar(0) ? std::copysign(excess, v) : Scalar(0);
}

/// Coefficient-wise soft thresholding of a vector expression.
template <typename Derived>
auto soft_threshold(const Eigen::MatrixBase<Derived>& v, typename Derived::Scalar g) {
  using Scalar = typename Derived::Scalar;
  return v.unaryExpr([g](Scalar x) { return soft_threshold<Scalar>(x, g); });
}

}  // namespace dprune
