#pragma once

#include <dprune/error.hpp>
#include <dprune/linalg.hpp>
#include <dprune/spectral/hessian.hpp>

#include <cstdint>
#include <string>

namespace dprune {

/// Eigenpairs of a symmetric matrix, eigenvalues sorted descending, one
/// eigenvector per column. `residuals` holds ||A v_i - lambda_i v_i|| for
/// iterative results and is empty for dense ones.
struct Spectrum {
  Vector<double> eigenvalues;
  Mat eigenvectors;
  Vector<double> residuals;

  Index size() const { return eigenvalues.size(); }
  Index dim() const { return eigenvectors.rows(); }
};

/// Full spectrum of a symmetric matrix. Throws DomainError when the input is
/// not symmetric (relative Frobenius asymmetry above 1e-10).
Spectrum dense_eig(const Mat& a);

struct LanczosOptions {
  Index max_steps = 1000;
  double tol = 1e-6;
  std::uint64_t seed = 0x1a2c05;
};

/// Raised when the Krylov budget is exhausted; carries the current
/// residual estimates of the wanted Ritz pairs.
class LanczosNotConverged : public NumericError {
 public:
  LanczosNotConverged(const std::string& what, Vector<double> residuals)
      : NumericError(what), residuals_(std::move(residuals)) {}
  const Vector<double>& residuals() const { return residuals_; }

 private:
  Vector<double> residuals_;
};

/// The k eigenpairs of largest magnitude of a symmetric operator.
///
/// Lanczos with full reorthogonalisation; an exhausted Krylov space is
/// continued from a fresh orthogonal start vector so repeated eigenvalues
/// are found too. A Ritz pair is accepted when its residual is below
/// tol * max(|theta|, eps^(2/3) ||T||). Result is sorted descending by value.
Spectrum lanczos_topk(const LinearOperator& op, Index d, Index k, const LanczosOptions& opts = {});

/// The `count` largest eigenpairs above `floor` (default: strictly positive),
/// descending. Negative entries of a largest-magnitude selection are dropped.
Spectrum keep_positive(const Spectrum& s, Index count, double floor = 0.0);

/// Rows are orthonormal eigenvectors spanning the leading curvature
/// directions.
struct TopSubspace {
  Mat rows;

  static TopSubspace from_spectrum(const Spectrum& s, Index count = 10, double floor = 0.0);
};

/// ||P delta|| / ||delta||; throws DomainError for a zero delta.
double projection_fraction(const TopSubspace& top, const ParamVector& delta);

/// Eigenvalue column ("index,eigenvalue,residual"); when `vectors_path` is
/// non-empty the eigenvector matrix is written there, one column per pair.
void write_spectrum_csv(const Spectrum& s, const std::string& values_path,
                        const std::string& vectors_path = {});

}  // namespace dprune
