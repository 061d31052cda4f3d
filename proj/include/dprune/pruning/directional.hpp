#pragma once

#include <dprune/error.hpp>
#include <dprune/linalg.hpp>
#include <dprune/spectral/zero_space.hpp>

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace dprune {

/// Pruning score s_j = sgn(w_j) theta_j with theta = Pi_0 sgn(w).
struct PruneScore {
  ParamVector s;
  ParamVector theta;
  Index zero_sign_count = 0;  // coordinates of w that were exactly zero
};

PruneScore score(const ZeroSpace& zs, const ParamVector& w_sgd);

struct DPSolution {
  ParamVector w_hat;
  double lambda = 0.0;
  std::vector<bool> pruned_mask;
};

/// Per-coordinate minimiser sgn(w) [|w| - lambda s]_+ of
/// 0.5 (w_sgd - x)^2 + lambda s |x|.
template <typename Scalar>
Scalar dp_solve_coordinate(Scalar w_sgd, Scalar lambda, Scalar s) {
  const Scalar mag = std::abs(w_sgd) - lambda * s;
  return mag > Scalar(0) ? sign(w_sgd) * mag : Scalar(0);
}

template <typename DerivedW, typename DerivedS>
Vector<typename DerivedW::Scalar> dp_solve(const Eigen::MatrixBase<DerivedW>& w_sgd,
                                           typename DerivedW::Scalar lambda,
                                           const Eigen::MatrixBase<DerivedS>& s) {
  require_same_dim(w_sgd.size(), s.size(), "dp_solve");
  using Scalar = typename DerivedW::Scalar;
  if (!(lambda >= Scalar(0))) throw DomainError("dp_solve: lambda must be >= 0");
  return w_sgd.binaryExpr(s, [lambda](Scalar w, Scalar sj) { return dp_solve_coordinate(w, lambda, sj); });
}

DPSolution dp_solve(const ParamVector& w_sgd, double lambda, const PruneScore& sc);

/// 0.5 ||w_sgd - w||^2 + lambda sum_j s_j |w_j|.
template <typename DerivedA, typename DerivedB, typename DerivedS>
typename DerivedA::Scalar dp_objective(const Eigen::MatrixBase<DerivedA>& w_sgd,
                                       const Eigen::MatrixBase<DerivedB>& w,
                                       typename DerivedA::Scalar lambda,
                                       const Eigen::MatrixBase<DerivedS>& s) {
  require_same_dim(w_sgd.size(), w.size(), "dp_objective");
  require_same_dim(w_sgd.size(), s.size(), "dp_objective");
  return 0.5 * (w_sgd - w).squaredNorm() + lambda * s.dot(w.cwiseAbs());
}

struct BruteResult {
  double argmin = 0.0;
  double objective = 0.0;
  bool from_grid = false;  // false when an analytic candidate won
};

/// Grid search of the 1-D objective on [-W, W] plus exact evaluation of the
/// candidates {0, w - lambda s (if > 0), w + lambda s (if < 0)}. Throws
/// DomainError when the grid is narrower than |w| + lambda |s| + 1 or when
/// the grid minimum sits on the boundary.
BruteResult dp_brute(double w_sgd, double lambda, double s, double grid_half_width, double grid_step);

/// Zero every coordinate with |w_j| <= tau.
ParamVector magnitude_prune(const ParamVector& w, double tau);

/// Fraction of exact zeros.
double sparsity(const ParamVector& w);

struct NormRatio {
  double ratio = 0.0;        // ||w||_2 / ||w||_1
  double lower_bound = 0.0;  // d_support^{-1/2}
  Index support = 0;
};

/// Throws DomainError for the zero vector.
NormRatio ratio_l2_l1(const ParamVector& w);

/// Columns index,w_sgd,theta,s,w_hat,pruned.
void write_pruning_csv(const std::string& path, const ParamVector& w_sgd, const PruneScore& sc,
                       const DPSolution& sol);

}  // namespace dprune
