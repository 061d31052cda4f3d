#include <dprune/spectral/zero_space.hpp>

#include <algorithm>
#include <cmath>
#include <vector>

namespace dprune {

ZeroSpace zero_space(const Spectrum& s, double tol_abs, double tol_rel) {
  if (s.size() == 0) throw DomainError("zero_space: empty spectrum");
  const double scale = s.eigenvalues.cwiseAbs().maxCoeff();
  ZeroSpace zs;
  zs.tol_used = std::max(tol_abs, tol_rel * scale);
  std::vector<Index> keep;
  for (Index i = 0; i < s.size(); ++i) {
    if (std::abs(s.eigenvalues(i)) <= zs.tol_used) keep.push_back(i);
  }
  zs.basis = s.eigenvectors(Eigen::all, keep);
  return zs;
}

double max_principal_angle(const Mat& a, const Mat& b) {
  require_same_dim(a.rows(), b.rows(), "principal angle");
  require_same_dim(a.cols(), b.cols(), "principal angle");
  if (a.cols() == 0) return 0.0;
  // Sines of the principal angles are the singular values of (I - A A^T) B;
  // this stays accurate for tiny angles where acos of cosines does not.
  const Mat residual = b - a * (a.transpose() * b);
  Eigen::JacobiSVD<Mat> svd(residual);
  const double s = std::min(1.0, svd.singularValues().maxCoeff());
  return std::asin(s);
}

}  // namespace dprune
