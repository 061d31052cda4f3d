#include <dprune/error.hpp>
#include <dprune/spectral/hessian.hpp>

#include <numeric>
#include <vector>

namespace dprune {

double curvature_step(const ParamVector& w) {
  return 1e-4 * (1.0 + (w.size() ? w.cwiseAbs().maxCoeff() : 0.0));
}

Mat dense_hessian(const Objective& obj, const ParamVector& w) {
  const Index d = obj.dim();
  require_same_dim(w.size(), d, "dense_hessian");
  if (d > kDenseHessianLimit) throw DomainError("dense_hessian: dimension exceeds dense limit");
  const double h = curvature_step(w);
  Mat hess(d, d);
  ParamVector probe = w;
  for (Index j = 0; j < d; ++j) {
    probe(j) = w(j) + h;
    const ParamVector up = obj.gradient(probe);
    probe(j) = w(j) - h;
    const ParamVector down = obj.gradient(probe);
    probe(j) = w(j);
    hess.col(j) = (up - down) / (2.0 * h);
  }
  Mat sym = 0.5 * (hess + hess.transpose());
  if (!sym.allFinite()) throw NumericError("dense_hessian: non-finite entries");
  return sym;
}

Mat dense_hessian(const NetworkSpec& spec, const ParamVector& w, const Dataset& data) {
  return dense_hessian(NetworkObjective(spec, data), w);
}

ParamVector hvp(const Objective& obj, const ParamVector& w, const ParamVector& v) {
  require_same_dim(v.size(), w.size(), "hvp");
  require_same_dim(w.size(), obj.dim(), "hvp");
  const double norm = v.norm();
  if (!(norm > 0.0)) throw DomainError("hvp: zero direction");
  const double eps = curvature_step(w) / norm;
  const ParamVector up = obj.gradient(w + eps * v);
  const ParamVector down = obj.gradient(w - eps * v);
  return (up - down) / (2.0 * eps);
}

ParamVector hvp(const NetworkSpec& spec, const ParamVector& w, const Dataset& data, const ParamVector& v) {
  return hvp(NetworkObjective(spec, data), w, v);
}

Mat grad_covariance(const Objective& obj, const ParamVector& w) {
  const Index n = obj.num_examples();
  if (n < 2) throw DomainError("grad_covariance: need at least two examples");
  const Index d = obj.dim();
  require_same_dim(w.size(), d, "grad_covariance");
  if (d > kDenseHessianLimit) throw DomainError("grad_covariance: dimension exceeds dense limit");
  Mat grads(d, n);
  for (Index i = 0; i < n; ++i) {
    const Index idx[1] = {i};
    grads.col(i) = obj.gradient(w, idx);
  }
  const ParamVector mean = grads.rowwise().mean();
  grads.colwise() -= mean;
  Mat cov = grads * grads.transpose() / static_cast<double>(n);
  return 0.5 * (cov + cov.transpose());
}

Mat grad_covariance(const NetworkSpec& spec, const ParamVector& w, const Dataset& data) {
  return grad_covariance(NetworkObjective(spec, data), w);
}

LinearOperator hessian_operator(const Objective& obj, const ParamVector& w) {
  return [&obj, w](const ParamVector& v) { return hvp(obj, w, v); };
}

LinearOperator matrix_operator(const Mat& a) {
  return [a](const ParamVector& v) -> ParamVector { return a * v; };
}

}  // namespace dprune
