#pragma once

#include <dprune/nn/network.hpp>
#include <dprune/spectral/zero_space.hpp>

#include <functional>
#include <vector>

namespace dprune {

/// Solution of w' = -grad l(w), sampled on a time grid.
struct FlowTrajectory {
  std::vector<double> times;
  std::vector<ParamVector> states;
  double dt_used = 0.0;

  const ParamVector& end() const { return states.back(); }
  /// Linear interpolation between stored states.
  ParamVector at(double time) const;
};

/// Classical RK4 on the full-data gradient. Every `store_every`-th step is
/// kept (the endpoint always is). Throws NumericError on divergence.
FlowTrajectory gradient_flow(const Objective& obj, const ParamVector& w0, double horizon, double dt,
                             Index store_every = 1);

/// ||w_dt(T) - w_{dt/2}(T)||_inf, the usual step-halving error estimate.
double step_halving_error(const Objective& obj, const ParamVector& w0, double horizon, double dt);

using HessianAtTime = std::function<Mat(double)>;

/// Phi(t, s) with d/dt Phi = -H(t) Phi and Phi(s, s) = I.
struct PrincipalSolution {
  double t = 0.0;
  double s = 0.0;
  Mat phi;
};

PrincipalSolution principal_solution(const HessianAtTime& hessian, double t, double s, double dt);

/// H(w(t)) along a stored trajectory (states interpolated linearly).
HessianAtTime hessian_along(const FlowTrajectory& traj, std::function<Mat(const ParamVector&)> hessian_of);

/// delta(t) = delta1(t) + delta2(t) with
/// delta1(t) = c mu int_0^t s^(mu-1) Phi(t, s) sgn(w(s)) ds
/// and delta2 (sign-change jumps) identically zero because trajectories with
/// sign changes are rejected.
struct DeltaEstimate {
  double t = 0.0;
  ParamVector delta;
  ParamVector delta1;
  ParamVector delta2;
  /// ||delta / (c t^mu) - Pi_0 sgn(w)||_inf; NaN when c == 0.
  double limit_gap = 0.0;
  Index nodes = 0;
};

/// Quadrature in u = s^mu (which removes the s^(mu-1) endpoint singularity)
/// with composite Simpson; the node count doubles until successive
/// estimates differ by less than `rel_tol` relative. Phi(t, .) is carried
/// backwards from s = t with RK4 steps no longer than `dt`.
DeltaEstimate delta_quadrature(double c, double mu, const FlowTrajectory& traj, const HessianAtTime& hessian,
                               const ZeroSpace& zs, double t, double dt = 1e-2, double rel_tol = 1e-8);

/// c sqrt(gamma) t^mu.
double lambda_at(double c, double gamma, double t, double mu);

}  // namespace dprune
