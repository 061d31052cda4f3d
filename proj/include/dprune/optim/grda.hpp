#pragma once

#include <dprune/error.hpp>
#include <dprune/linalg.hpp>
#include <dprune/optim/soft_threshold.hpp>

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

namespace dprune {

/// Tuning function g(n, gamma) = c sqrt(gamma) (n gamma)^mu.
struct TuningFn {
  double c = 0.0;
  double mu = 0.51;

  bool operator==(const TuningFn&) const = default;

  /// Throws for c < 0 or mu outside (0, 1). Returns human-readable notes
  /// for settings the convergence theory does not cover (mu <= 0.5).
  std::vector<std::string> validate() const {
    if (!(c >= 0.0) || !std::isfinite(c)) throw DomainError("tuning function: c must be finite and >= 0");
    if (!(mu > 0.0 && mu < 1.0)) throw DomainError("tuning function: mu must lie in (0, 1)");
    std::vector<std::string> notes;
    if (mu <= 0.5) {
      notes.push_back("mu=" + std::to_string(mu) +
                      " is outside (0.5, 1); the directional-pruning limit is not guaranteed");
    }
    return notes;
  }
};

template <typename Scalar>
Scalar tuning_g(std::uint64_t n, Scalar gamma, const TuningFn& tf) {
  if (n == 0 || tf.c == 0.0) return Scalar(0);
  const Scalar t = static_cast<Scalar>(n) * gamma;
  return static_cast<Scalar>(tf.c) * std::sqrt(gamma) * std::pow(t, static_cast<Scalar>(tf.mu));
}

/// w - gamma * grad.
template <typename DerivedW, typename DerivedG>
auto sgd_step(const Eigen::MatrixBase<DerivedW>& w, const Eigen::MatrixBase<DerivedG>& grad,
              typename DerivedW::Scalar gamma) {
  require_same_dim(w.size(), grad.size(), "sgd_step");
  using Scalar = typename DerivedW::Scalar;
  return Vector<Scalar>(w - gamma * grad);
}

/// Optimizer state of dual averaging with soft thresholding.
///
/// `v` is the dual accumulator w0 - sum_k gamma_k grad_k, `w` the primal
/// weights S_{g_tilde}(v). The threshold g_tilde is kept in telescoped form
/// g_tilde = threshold_offset + g(n, last_gamma): under a constant learning
/// rate the offset is exactly zero and g_tilde equals g(n, gamma) bitwise.
template <typename Scalar>
struct GrdaState {
  Vector<Scalar> v;
  Vector<Scalar> w;
  Vector<Scalar> w0;
  Scalar g_tilde = 0;
  std::uint64_t n = 0;
  Scalar threshold_offset = 0;
  Scalar last_gamma = 0;  // 0 until the first step

  static GrdaState init(const Vector<Scalar>& w0) {
    if (!w0.allFinite()) throw NumericError("grda: initial weights must be finite");
    GrdaState s;
    s.v = w0;
    s.w = w0;
    s.w0 = w0;
    return s;
  }
};

/// One step of dual averaging at a constant learning rate:
/// v <- v - gamma grad; n <- n + 1; w <- S_{g(n, gamma)}(v).
template <typename Scalar, typename DerivedG>
void grda_step(GrdaState<Scalar>& state, const Eigen::MatrixBase<DerivedG>& grad, Scalar gamma,
               const TuningFn& tf) {
  require_same_dim(state.v.size(), grad.size(), "grda_step");
  state.v = state.v - gamma * grad;
  state.n += 1;
  state.g_tilde = tuning_g(state.n, gamma, tf);
  state.threshold_offset = 0;
  state.last_gamma = gamma;
  state.w = soft_threshold(state.v, state.g_tilde);
}

/// Variant for time-varying learning rates: the threshold accumulates the
/// increment g(n, gamma_n) - g(n-1, gamma_n) at the current rate, so it is
/// continuous across a learning-rate drop.
template <typename Scalar, typename DerivedG>
void grda_step_scheduled(GrdaState<Scalar>& state, const Eigen::MatrixBase<DerivedG>& grad,
                         Scalar gamma, const TuningFn& tf) {
  require_same_dim(state.v.size(), grad.size(), "grda_step_scheduled");
  if (!(gamma > 0)) throw DomainError("grda_step_scheduled: learning rate must be positive");
  state.v = state.v - gamma * grad;
  if (gamma != state.last_gamma) {
    state.threshold_offset = state.g_tilde - tuning_g(state.n, gamma, tf);
    state.last_gamma = gamma;
  }
  state.n += 1;
  state.g_tilde = state.threshold_offset + tuning_g(state.n, gamma, tf);
  state.w = soft_threshold(state.v, state.g_tilde);
}

}  // namespace dprune
