#pragma once

#include <dprune/connectivity/curve.hpp>
#include <dprune/harness/runner.hpp>
#include <dprune/spectral/eigen.hpp>
#include <dprune/theory/verify.hpp>

#include <string>
#include <vector>

namespace dprune {

struct LadderResult {
  std::vector<DeviationReport> reports;  // one per gamma, in input order
  std::vector<std::string> json_paths;
  ParamVector zero_space_dims;           // rank of the estimated flat subspace per gamma
};

/// For each gamma: paired SGD/gRDA legs with a constant rate run for
/// round(horizon / gamma) steps, the flat subspace of the Hessian at the SGD
/// endpoint, the pruning score, and the residual against dp_solve. Writes
/// dp_gamma_<g>.json and dp_gamma_<g>.csv per gamma plus ladder.json.
LadderResult verify_dp_ladder(const RunConfig& cfg, const std::vector<double>& gammas, double horizon,
                              const std::string& out_dir);

struct SpectrumResult {
  Spectrum top;       // largest-magnitude eigenpairs, sorted descending
  Spectrum positive;  // leading positive subset
};

/// Eigenpairs of the training-loss Hessian at `w`. Dense curvature is used
/// up to kDenseHessianLimit parameters, Hessian-vector products beyond.
SpectrumResult hessian_spectrum(const RunConfig& cfg, const ParamVector& w, Index top, Index keep_positive,
                                const LanczosOptions& opts = {});
SpectrumResult spectrum_at_checkpoint(const RunConfig& cfg, const std::string& checkpoint_path, Index top,
                                      Index keep_positive, const std::string& out_dir);

struct ProjectionRow {
  std::uint64_t step = 0;
  double fraction = 0.0;         // ||P delta|| / ||delta||
  double random_baseline = 0.0;  // same ratio averaged over random directions
  double delta_norm = 0.0;
  Index top_dim = 0;
};

/// Lock-stepped SGD and gRDA legs; at every metrics step with a nonzero
/// deviation delta = w_grda - w_sgd, the share of delta lying in the top
/// positive eigenspace (at most `top_count` vectors) of the Hessian at the
/// SGD iterate. Writes projection.csv.
std::vector<ProjectionRow> projection_series(const RunConfig& cfg, const std::string& out_dir, Index top_count = 10,
                                             Index baseline_draws = 100);

struct ConnectResult {
  BezierCurve<double> curve;
  PathEvaluation path;
  PathEvaluation chord;
  PlaneGrid plane;
};

/// Trains SGD and gRDA endpoints, fits a Bezier curve between them and
/// writes path.csv, chord.csv, plane.csv and plane.json.
ConnectResult connect_endpoints(const RunConfig& cfg, const CurveTrainOptions& curve_opts, Index path_points,
                                Index plane_resolution, const std::string& out_dir);

/// Largest relative gradient error over `instances` random weight draws and
/// random batches of the training data.
double gradcheck(const RunConfig& cfg, Index instances, double eps);

}  // namespace dprune
