#include <dprune/error.hpp>
#include <dprune/linalg.hpp>
#include <dprune/theory/flow.hpp>

#include <algorithm>
#include <cmath>

namespace dprune {

namespace {

ParamVector rk4_step(const Objective& obj, const ParamVector& w, double h) {
  const ParamVector k1 = -obj.gradient(w);
  const ParamVector k2 = -obj.gradient(w + 0.5 * h * k1);
  const ParamVector k3 = -obj.gradient(w + 0.5 * h * k2);
  const ParamVector k4 = -obj.gradient(w + h * k3);
  return w + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void check_state(const ParamVector& w) {
  if (!w.allFinite() || w.cwiseAbs().maxCoeff() > 1e150) throw NumericError("gradient flow diverged");
}

ParamVector flow_endpoint(const Objective& obj, const ParamVector& w0, double horizon, double dt) {
  const auto steps = static_cast<long>(std::ceil(horizon / dt - 1e-12));
  ParamVector w = w0;
  double time = 0.0;
  for (long k = 0; k < steps; ++k) {
    const double h = std::min(dt, horizon - time);
    w = rk4_step(obj, w, h);
    check_state(w);
    time = (k + 1 == steps) ? horizon : time + h;
  }
  return w;
}

// One RK4 step of X' = F(time, X) for matrices.
template <typename F>
Mat rk4_matrix(const F& f, double time, const Mat& x, double h) {
  const Mat k1 = f(time, x);
  const Mat k2 = f(time + 0.5 * h, x + 0.5 * h * k1);
  const Mat k3 = f(time + 0.5 * h, x + 0.5 * h * k2);
  const Mat k4 = f(time + h, x + h * k3);
  return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

ParamVector sign_vector(const ParamVector& w) {
  return w.unaryExpr([](double x) { return sign(x); });
}

}  // namespace

ParamVector FlowTrajectory::at(double time) const {
  if (times.empty()) throw DomainError("empty trajectory");
  if (time <= times.front()) return states.front();
  if (time >= times.back()) return states.back();
  const auto it = std::upper_bound(times.begin(), times.end(), time);
  const auto hi = static_cast<std::size_t>(it - times.begin());
  const std::size_t lo = hi - 1;
  const double a = (time - times[lo]) / (times[hi] - times[lo]);
  return (1.0 - a) * states[lo] + a * states[hi];
}

FlowTrajectory gradient_flow(const Objective& obj, const ParamVector& w0, double horizon, double dt,
                             Index store_every) {
  if (!(dt > 0.0)) throw DomainError("gradient_flow: dt must be positive");
  if (!(horizon >= 0.0)) throw DomainError("gradient_flow: horizon must be >= 0");
  if (store_every < 1) throw DomainError("gradient_flow: store_every must be >= 1");
  require_same_dim(w0.size(), obj.dim(), "gradient_flow");
  FlowTrajectory traj;
  traj.dt_used = dt;
  traj.times.push_back(0.0);
  traj.states.push_back(w0);
  const auto steps = static_cast<long>(std::ceil(horizon / dt - 1e-12));
  ParamVector w = w0;
  double time = 0.0;
  for (long k = 0; k < steps; ++k) {
    const double h = std::min(dt, horizon - time);
    w = rk4_step(obj, w, h);
    check_state(w);
    time = (k + 1 == steps) ? horizon : time + h;
    if ((k + 1) % store_every == 0 || k + 1 == steps) {
      traj.times.push_back(time);
      traj.states.push_back(w);
    }
  }
  return traj;
}

double step_halving_error(const Objective& obj, const ParamVector& w0, double horizon, double dt) {
  const ParamVector coarse = flow_endpoint(obj, w0, horizon, dt);
  const ParamVector fine = flow_endpoint(obj, w0, horizon, 0.5 * dt);
  return (coarse - fine).cwiseAbs().maxCoeff();
}

PrincipalSolution principal_solution(const HessianAtTime& hessian, double t, double s, double dt) {
  if (!(t >= s)) throw DomainError("principal_solution: need t >= s");
  if (!(dt > 0.0)) throw DomainError("principal_solution: dt must be positive");
  const Mat h0 = hessian(s);
  Mat phi = Mat::Identity(h0.rows(), h0.cols());
  const auto rhs = [&](double time, const Mat& x) -> Mat { return -hessian(time) * x; };
  const auto steps = static_cast<long>(std::ceil((t - s) / dt - 1e-12));
  double time = s;
  for (long k = 0; k < steps; ++k) {
    const double h = std::min(dt, t - time);
    phi = rk4_matrix(rhs, time, phi, h);
    if (!phi.allFinite()) throw NumericError("principal_solution diverged");
    time = (k + 1 == steps) ? t : time + h;
  }
  return {t, s, phi};
}

HessianAtTime hessian_along(const FlowTrajectory& traj, std::function<Mat(const ParamVector&)> hessian_of) {
  return [&traj, f = std::move(hessian_of)](double time) { return f(traj.at(time)); };
}

DeltaEstimate delta_quadrature(double c, double mu, const FlowTrajectory& traj, const HessianAtTime& hessian,
                               const ZeroSpace& zs, double t, double dt, double rel_tol) {
  if (!(mu > 0.0 && mu < 1.0)) throw DomainError("delta_quadrature: mu must lie in (0, 1)");
  if (!(c >= 0.0)) throw DomainError("delta_quadrature: c must be >= 0");
  if (!(t > 0.0)) throw DomainError("delta_quadrature: t must be positive");
  if (traj.states.empty() || t > traj.times.back() + 1e-12) {
    throw DomainError("delta_quadrature: trajectory does not reach t");
  }
  const ParamVector sigma = sign_vector(traj.states.front());
  for (std::size_t i = 0; i < traj.states.size() && traj.times[i] <= t; ++i) {
    if (sign_vector(traj.states[i]) != sigma) {
      throw DomainError("delta_quadrature: sign change at time " + std::to_string(traj.times[i]) +
                        "; only sign-stable trajectories are supported");
    }
  }
  const Index d = sigma.size();

  DeltaEstimate est;
  est.t = t;
  est.delta2 = ParamVector::Zero(d);
  if (c == 0.0) {
    est.delta1 = ParamVector::Zero(d);
    est.delta = est.delta1;
    est.limit_gap = std::nan("");
    return est;
  }

  // Psi(s) = Phi(t, s) solves dPsi/ds = Psi H(s), Psi(t) = I; integrating
  // from s = t down to 0 only ever sees decaying modes.
  const auto backward_rhs = [&](double tau, const Mat& psi) -> Mat { return -psi * hessian(t - tau); };
  const double upper = std::pow(t, mu);

  const auto simpson = [&](Index intervals) {
    ParamVector acc = ParamVector::Zero(d);
    Mat psi = Mat::Identity(d, d);
    double s_prev = t;
    for (Index i = intervals; i >= 0; --i) {
      const double u = upper * static_cast<double>(i) / static_cast<double>(intervals);
      const double s_node = i == intervals ? t : std::pow(u, 1.0 / mu);
      const double span = s_prev - s_node;
      if (span > 0.0) {
        const auto sub = static_cast<long>(std::ceil(span / dt));
        const double h = span / static_cast<double>(sub);
        double tau = t - s_prev;
        for (long k = 0; k < sub; ++k) {
          psi = rk4_matrix(backward_rhs, tau, psi, h);
          tau += h;
        }
      }
      s_prev = s_node;
      const double weight = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
      acc += weight * (psi * sigma);
    }
    if (!acc.allFinite()) throw NumericError("delta_quadrature: non-finite integrand");
    return ParamVector(c * acc * upper / (3.0 * static_cast<double>(intervals)));
  };

  Index intervals = 64;
  ParamVector previous = simpson(intervals);
  constexpr Index kMaxIntervals = Index{1} << 22;
  while (true) {
    intervals *= 2;
    const ParamVector current = simpson(intervals);
    const double change = (current - previous).cwiseAbs().maxCoeff();
    const double scale = std::max(current.cwiseAbs().maxCoeff(), 1e-300);
    previous = current;
    if (change <= rel_tol * scale) break;
    if (intervals >= kMaxIntervals) throw NumericError("delta_quadrature: refinement did not converge");
  }
  est.delta1 = previous;
  est.delta = est.delta1 + est.delta2;
  est.nodes = intervals + 1;
  const ParamVector target = project(zs, sigma);
  est.limit_gap = (est.delta / (c * std::pow(t, mu)) - target).cwiseAbs().maxCoeff();
  return est;
}

double lambda_at(double c, double gamma, double t, double mu) {
  if (!(c >= 0.0 && gamma > 0.0 && t >= 0.0)) throw DomainError("lambda_at: need c >= 0, gamma > 0, t >= 0");
  return c * std::sqrt(gamma) * std::pow(t, mu);
}

}  // namespace dprune
