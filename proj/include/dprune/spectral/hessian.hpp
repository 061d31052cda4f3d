#pragma once

#include <dprune/nn/network.hpp>

#include <functional>

namespace dprune {

/// Largest dimension for which dense d x d curvature matrices are built.
inline constexpr Index kDenseHessianLimit = 2000;

/// Finite-difference step used for curvature: 1e-4 (1 + ||w||_inf).
double curvature_step(const ParamVector& w);

/// Full-data Hessian by central differences of the analytic gradient,
/// symmetrised. Exact (to rounding) when the gradient is affine.
Mat dense_hessian(const Objective& obj, const ParamVector& w);
Mat dense_hessian(const NetworkSpec& spec, const ParamVector& w, const Dataset& data);

/// Hessian-vector product (grad(w + e v) - grad(w - e v)) / (2 e) with e
/// scaled by ||v||. Throws DomainError for a zero vector.
ParamVector hvp(const Objective& obj, const ParamVector& w, const ParamVector& v);
ParamVector hvp(const NetworkSpec& spec, const ParamVector& w, const Dataset& data, const ParamVector& v);

/// Empirical covariance of per-example gradients about their mean,
/// normalised by N.
Mat grad_covariance(const Objective& obj, const ParamVector& w);
Mat grad_covariance(const NetworkSpec& spec, const ParamVector& w, const Dataset& data);

/// Matrix-free symmetric operator x -> A x.
using LinearOperator = std::function<ParamVector(const ParamVector&)>;

LinearOperator hessian_operator(const Objective& obj, const ParamVector& w);
LinearOperator matrix_operator(const Mat& a);

}  // namespace dprune
