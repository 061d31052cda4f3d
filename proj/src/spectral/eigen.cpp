#include <dprune/error.hpp>
#include <dprune/nn/random.hpp>
#include <dprune/spectral/eigen.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <numeric>
#include <vector>

namespace dprune {

namespace {

Spectrum sorted_descending(const Vector<double>& values, const Mat& vectors, const Vector<double>& residuals) {
  std::vector<Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return values(a) > values(b); });
  Spectrum s;
  s.eigenvalues.resize(values.size());
  s.eigenvectors.resize(vectors.rows(), values.size());
  if (residuals.size()) s.residuals.resize(values.size());
  for (Index i = 0; i < values.size(); ++i) {
    const Index src = order[static_cast<std::size_t>(i)];
    s.eigenvalues(i) = values(src);
    s.eigenvectors.col(i) = vectors.col(src);
    if (residuals.size()) s.residuals(i) = residuals(src);
  }
  return s;
}

ParamVector random_unit(Rng& rng, Index d) {
  ParamVector v(d);
  for (Index i = 0; i < d; ++i) v(i) = rng.normal();
  return v.normalized();
}

}  // namespace

Spectrum dense_eig(const Mat& a) {
  if (a.rows() != a.cols()) throw DimensionError("dense_eig: matrix must be square");
  const double scale = a.norm();
  if ((a - a.transpose()).norm() > 1e-10 * std::max(scale, 1e-300)) {
    throw DomainError("dense_eig: matrix is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Mat> solver(a);
  if (solver.info() != Eigen::Success) throw NumericError("dense_eig: eigensolver failed");
  return sorted_descending(solver.eigenvalues(), solver.eigenvectors(), {});
}

namespace {

Vector<double> tridiagonal_values(const std::vector<double>& alpha, const std::vector<double>& beta, Index from,
                                  Index to) {
  const Index n = to - from;
  Vector<double> diag = Eigen::Map<const Vector<double>>(alpha.data() + from, n);
  Vector<double> sub(n > 1 ? n - 1 : 0);
  for (Index i = 0; i + 1 < n; ++i) sub(i) = beta[static_cast<std::size_t>(from + i)];
  Eigen::SelfAdjointEigenSolver<Mat> tri;
  tri.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  return tri.eigenvalues();
}

}  // namespace

Spectrum lanczos_topk(const LinearOperator& op, Index d, Index k, const LanczosOptions& opts) {
  if (d < 1) throw DomainError("lanczos: dimension must be >= 1");
  if (k < 1 || k > d) throw DomainError("lanczos: k must lie in [1, d]");
  if (opts.max_steps < k) throw DomainError("lanczos: Krylov budget smaller than k");
  const Index budget = std::min(opts.max_steps, d);
  const double eps23 = std::pow(std::numeric_limits<double>::epsilon(), 2.0 / 3.0);

  Rng rng(opts.seed);
  Mat q(d, budget + 1);
  std::vector<double> alpha;
  std::vector<double> beta;  // beta[j] couples q_j and q_{j+1}
  q.col(0) = random_unit(rng, d);
  double anorm = 0.0;

  Vector<double> wanted_residuals;
  Index block_start = 0;
  for (Index j = 0; j < budget; ++j) {
    ParamVector w = op(q.col(j));
    require_same_dim(w.size(), d, "lanczos operator");
    if (!w.allFinite()) throw NumericError("lanczos: operator returned non-finite values");
    const double a = q.col(j).dot(w);
    alpha.push_back(a);
    w -= a * q.col(j);
    if (j > 0) w -= beta[static_cast<std::size_t>(j - 1)] * q.col(j - 1);
    for (int pass = 0; pass < 2; ++pass) {
      const auto basis = q.leftCols(j + 1);
      w -= basis * (basis.transpose() * w);
    }
    double b = w.norm();
    anorm = std::max(anorm, std::abs(a) + b + (j > 0 ? beta[static_cast<std::size_t>(j - 1)] : 0.0));
    const Index m = j + 1;
    const bool exhausted = b <= 1e-10 * std::max(anorm, 1e-300);

    // An exhausted Krylov space says nothing about its complement. It is
    // accepted once the block grown from the latest restart adds nothing
    // that competes with the k largest values found before it.
    const bool complete = (m == d);
    bool settled = complete;
    if (exhausted && !complete && block_start > 0 && block_start >= k) {
      const Vector<double> before = tridiagonal_values(alpha, beta, 0, block_start).cwiseAbs();
      const Vector<double> latest = tridiagonal_values(alpha, beta, block_start, m).cwiseAbs();
      std::vector<double> mags(before.data(), before.data() + before.size());
      std::nth_element(mags.begin(), mags.begin() + (k - 1), mags.end(), std::greater<>());
      settled = latest.maxCoeff() < mags[static_cast<std::size_t>(k - 1)];
    }
    const bool check = m >= k && (exhausted ? settled : (m <= 64 || m % 8 == 0 || m == budget));
    if (check) {
      Vector<double> diag = Eigen::Map<const Vector<double>>(alpha.data(), m);
      Vector<double> sub(m > 1 ? m - 1 : 0);
      for (Index i = 0; i + 1 < m; ++i) sub(i) = beta[static_cast<std::size_t>(i)];
      Eigen::SelfAdjointEigenSolver<Mat> tri;
      tri.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
      const Vector<double>& theta = tri.eigenvalues();
      const Mat& y = tri.eigenvectors();
      const double tnorm = theta.cwiseAbs().maxCoeff();

      std::vector<Index> order(static_cast<std::size_t>(m));
      std::iota(order.begin(), order.end(), Index{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](Index x, Index z) { return std::abs(theta(x)) > std::abs(theta(z)); });

      const double tail = exhausted ? 0.0 : b;
      Vector<double> values(k), residuals(k);
      bool converged = true;
      for (Index i = 0; i < k; ++i) {
        const Index src = order[static_cast<std::size_t>(i)];
        const double r = complete ? 0.0 : tail * std::abs(y(m - 1, src));
        values(i) = theta(src);
        residuals(i) = r;
        if (r > opts.tol * std::max(std::abs(theta(src)), eps23 * tnorm)) converged = false;
      }
      wanted_residuals = residuals;
      if (converged) {
        const std::vector<Index> top(order.begin(), order.begin() + k);
        const Mat ritz = q.leftCols(m) * y(Eigen::all, top);
        return sorted_descending(values, ritz, residuals);
      }
    }
    if (m == budget) break;
    if (exhausted) {
      // Invariant subspace found: restart from a vector orthogonal to it.
      ParamVector fresh = random_unit(rng, d);
      for (int pass = 0; pass < 2; ++pass) {
        const auto basis = q.leftCols(m);
        fresh -= basis * (basis.transpose() * fresh);
      }
      b = 0.0;
      q.col(m) = fresh.normalized();
      block_start = m;
    } else {
      q.col(m) = w / b;
    }
    beta.push_back(b);
  }
  throw LanczosNotConverged("lanczos: no convergence within " + std::to_string(budget) + " steps",
                            wanted_residuals);
}

Spectrum keep_positive(const Spectrum& s, Index count, double floor) {
  std::vector<Index> keep;
  for (Index i = 0; i < s.size() && static_cast<Index>(keep.size()) < count; ++i) {
    if (s.eigenvalues(i) > floor) keep.push_back(i);
  }
  Spectrum out;
  out.eigenvalues = s.eigenvalues(keep);
  out.eigenvectors = s.eigenvectors(Eigen::all, keep);
  if (s.residuals.size()) out.residuals = s.residuals(keep);
  return out;
}

TopSubspace TopSubspace::from_spectrum(const Spectrum& s, Index count, double floor) {
  const Spectrum pos = keep_positive(s, count, floor);
  return TopSubspace{pos.eigenvectors.transpose()};
}

double projection_fraction(const TopSubspace& top, const ParamVector& delta) {
  require_same_dim(top.rows.cols(), delta.size(), "projection_fraction");
  const double norm = delta.norm();
  if (!(norm > 0.0)) throw DomainError("projection_fraction: zero delta");
  return std::min(1.0, (top.rows * delta).norm() / norm);
}

void write_spectrum_csv(const Spectrum& s, const std::string& values_path, const std::string& vectors_path) {
  std::ofstream os(values_path);
  if (!os) throw std::runtime_error("cannot open '" + values_path + "' for writing");
  os << "index,eigenvalue,residual\n" << std::setprecision(17);
  for (Index i = 0; i < s.size(); ++i) {
    os << i << ',' << s.eigenvalues(i) << ',';
    if (s.residuals.size()) os << s.residuals(i);
    os << '\n';
  }
  if (vectors_path.empty()) return;
  std::ofstream vs(vectors_path);
  if (!vs) throw std::runtime_error("cannot open '" + vectors_path + "' for writing");
  for (Index j = 0; j < s.size(); ++j) vs << (j ? "," : "") << 'v' << j;
  vs << '\n' << std::setprecision(17);
  for (Index i = 0; i < s.dim(); ++i) {
    for (Index j = 0; j < s.size(); ++j) vs << (j ? "," : "") << s.eigenvectors(i, j);
    vs << '\n';
  }
}

}  // namespace dprune
