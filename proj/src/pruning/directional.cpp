#include <dprune/pruning/directional.hpp>

#include <fstream>
#include <iomanip>
#include <iostream>
#include <limits>

namespace dprune {

PruneScore score(const ZeroSpace& zs, const ParamVector& w_sgd) {
  require_same_dim(w_sgd.size(), zs.dim(), "score");
  PruneScore out;
  const ParamVector sgn = w_sgd.unaryExpr([](double x) { return sign(x); });
  out.zero_sign_count = (w_sgd.array() == 0.0).count();
  if (out.zero_sign_count > 0) {
    std::cerr << "warning: score: " << out.zero_sign_count
              << " coordinate(s) of w are exactly zero; using sgn(0) = 0\n";
  }
  out.theta = project(zs, sgn);
  out.s = sgn.cwiseProduct(out.theta);
  return out;
}

DPSolution dp_solve(const ParamVector& w_sgd, double lambda, const PruneScore& sc) {
  DPSolution sol;
  sol.lambda = lambda;
  sol.w_hat = dp_solve(w_sgd, lambda, sc.s);
  sol.pruned_mask.resize(static_cast<std::size_t>(sol.w_hat.size()));
  for (Index j = 0; j < sol.w_hat.size(); ++j) sol.pruned_mask[static_cast<std::size_t>(j)] = sol.w_hat(j) == 0.0;
  return sol;
}

BruteResult dp_brute(double w_sgd, double lambda, double s, double grid_half_width, double grid_step) {
  if (!(grid_step > 0.0)) throw DomainError("dp_brute: grid step must be positive");
  if (grid_half_width < std::abs(w_sgd) + lambda * std::abs(s) + 1.0) {
    throw DomainError("dp_brute: grid does not cover |w| + lambda |s| + 1");
  }
  const auto f = [&](double x) { return 0.5 * (w_sgd - x) * (w_sgd - x) + lambda * s * std::abs(x); };

  const auto steps = static_cast<long>(std::floor(2.0 * grid_half_width / grid_step));
  BruteResult best{0.0, std::numeric_limits<double>::infinity(), true};
  long best_k = -1;
  for (long k = 0; k <= steps; ++k) {
    const double x = -grid_half_width + static_cast<double>(k) * grid_step;
    const double v = f(x);
    if (v < best.objective) {
      best = {x, v, true};
      best_k = k;
    }
  }
  if (best_k == 0 || best_k == steps) throw DomainError("dp_brute: grid minimum on the boundary");

  std::vector<double> candidates{0.0};
  if (w_sgd - lambda * s > 0.0) candidates.push_back(w_sgd - lambda * s);
  if (w_sgd + lambda * s < 0.0) candidates.push_back(w_sgd + lambda * s);
  for (double x : candidates) {
    const double v = f(x);
    if (v <= best.objective) best = {x, v, false};
  }
  return best;
}

ParamVector magnitude_prune(const ParamVector& w, double tau) {
  if (!(tau >= 0.0)) throw DomainError("magnitude_prune: tau must be >= 0");
  return w.unaryExpr([tau](double x) { return std::abs(x) <= tau ? 0.0 : x; });
}

double sparsity(const ParamVector& w) {
  if (w.size() < 1) throw DomainError("sparsity: empty vector");
  return static_cast<double>((w.array() == 0.0).count()) / static_cast<double>(w.size());
}

NormRatio ratio_l2_l1(const ParamVector& w) {
  NormRatio r;
  r.support = (w.array() != 0.0).count();
  if (r.support == 0) throw DomainError("ratio_l2_l1: zero vector");
  r.ratio = w.norm() / w.lpNorm<1>();
  r.lower_bound = 1.0 / std::sqrt(static_cast<double>(r.support));
  return r;
}

void write_pruning_csv(const std::string& path, const ParamVector& w_sgd, const PruneScore& sc,
                       const DPSolution& sol) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << "index,w_sgd,theta,s,w_hat,pruned\n" << std::setprecision(17);
  for (Index j = 0; j < w_sgd.size(); ++j) {
    os << j << ',' << w_sgd(j) << ',' << sc.theta(j) << ',' << sc.s(j) << ',' << sol.w_hat(j) << ','
       << (sol.pruned_mask[static_cast<std::size_t>(j)] ? 1 : 0) << '\n';
  }
}

}  // namespace dprune
