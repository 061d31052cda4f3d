#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <span>

namespace dprune {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

/// Flat vector of all network weights. Everything the optimizers, the
/// spectral tools and the pruning rules exchange is one of these.
using ParamVector = Vector<double>;

using Mat = Matrix<double>;

/// Row indices (0-based) into a dataset.
using BatchIndices = std::span<const Index>;

template <typename Scalar>
constexpr Scalar sign(Scalar x) {
  return static_cast<Scalar>((Scalar(0) < x) - (x < Scalar(0)));
}

template <typename Derived>
bool all_finite(const Eigen::DenseBase<Derived>& x) {
  return x.allFinite();
}

}  // namespace dprune
