#pragma once

#include <dprune/error.hpp>
#include <dprune/spectral/eigen.hpp>

namespace dprune {

/// Default tolerances for classifying an eigenvalue as zero.
inline constexpr double kZeroTolAbs = 1e-10;
inline constexpr double kZeroTolRel = 1e-6;

/// Orthonormal basis (columns) of the estimated flat subspace together with
/// the eigenvalue cutoff that produced it.
struct ZeroSpace {
  Mat basis;
  double tol_used = 0.0;

  Index dim() const { return basis.rows(); }
  Index rank() const { return basis.cols(); }
};

/// Eigenvectors whose |eigenvalue| <= max(tol_abs, tol_rel * max|eigenvalue|).
ZeroSpace zero_space(const Spectrum& s, double tol_abs = kZeroTolAbs, double tol_rel = kZeroTolRel);

/// Orthogonal projection B B^T x onto the flat subspace.
template <typename Derived>
Vector<typename Derived::Scalar> project(const ZeroSpace& zs, const Eigen::MatrixBase<Derived>& x) {
  require_same_dim(x.size(), zs.dim(), "project");
  if (zs.rank() == 0) return Vector<typename Derived::Scalar>::Zero(x.size());
  return zs.basis * (zs.basis.transpose() * x);
}

/// Largest principal angle (radians) between the column spans of two
/// orthonormal bases of equal rank.
double max_principal_angle(const Mat& a, const Mat& b);

}  // namespace dprune
