#pragma once

#include <dprune/pruning/directional.hpp>

#include <string>

namespace dprune {

/// Comparison of a dual-averaging endpoint with the directional-pruning
/// prediction dp_solve(w_sgd, lambda, s).
struct DeviationReport {
  double gamma = 0.0;
  double t = 0.0;
  double lambda = 0.0;
  double residual_inf = 0.0;
  double residual_l2 = 0.0;
  double support_match_fraction = 0.0;
  double sgd_inf_norm = 0.0;
  ParamVector predicted;
  ParamVector residual;  // grda_end - predicted
  std::string per_coordinate_path;
};

DeviationReport verify_dp(const ParamVector& sgd_end, const ParamVector& grda_end, double lambda,
                          const PruneScore& sc);

/// Same, with lambda = c sqrt(gamma) t^mu filled in from the run parameters.
DeviationReport verify_dp(const ParamVector& sgd_end, const ParamVector& grda_end, double c, double mu,
                          double gamma, double t, const PruneScore& sc);

/// JSON object {gamma, t, lambda, residual_inf, residual_l2,
/// support_match_fraction, per_coordinate}.
std::string deviation_report_json(const DeviationReport& r);

/// Writes index,w_sgd,w_grda,predicted,residual to `csv_path` and records the
/// path in the report.
void write_per_coordinate_csv(DeviationReport& r, const ParamVector& sgd_end, const ParamVector& grda_end,
                              const std::string& csv_path);

}  // namespace dprune
