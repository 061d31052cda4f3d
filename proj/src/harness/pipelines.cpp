#include <dprune/harness/pipelines.hpp>
#include <dprune/nn/random.hpp>
#include <dprune/spectral/hessian.hpp>
#include <dprune/spectral/zero_space.hpp>

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>

namespace dprune {

namespace fs = std::filesystem;

namespace {

std::string tag(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::scientific);
  return std::string(buf, r.ptr);
}

std::ofstream open_out(const fs::path& p) {
  std::ofstream os(p);
  if (!os) throw std::runtime_error("cannot open '" + p.string() + "' for writing");
  return os;
}

Spectrum full_spectrum(const NetworkObjective& obj, const ParamVector& w) {
  if (obj.dim() > kDenseHessianLimit) throw DomainError("dense spectrum requested above the dense size limit");
  return dense_eig(dense_hessian(obj, w));
}

}  // namespace

LadderResult verify_dp_ladder(const RunConfig& cfg, const std::vector<double>& gammas, double horizon,
                              const std::string& out_dir) {
  if (gammas.empty()) throw ConfigError("gamma", "ladder is empty");
  if (!(horizon > 0.0)) throw ConfigError("horizon", "must be positive");
  fs::create_directories(out_dir);
  const Problem problem = build_problem(cfg);
  const NetworkObjective obj(problem.spec, problem.train);
  const ParamVector w0 = initial_weights(cfg);

  LadderResult out;
  out.zero_space_dims.resize(static_cast<Index>(gammas.size()));
  nlohmann::ordered_json summary = nlohmann::ordered_json::array();
  for (std::size_t i = 0; i < gammas.size(); ++i) {
    RunConfig c = cfg;
    c.schedule = LrSchedule{ScheduleKind::constant, gammas[i], {}};
    c.steps = static_cast<std::uint64_t>(std::llround(horizon / gammas[i]));
    if (c.steps == 0) throw ConfigError("gamma", "horizon shorter than one step");
    c.validate();
    Trainer sgd(c, obj, OptimizerKind::sgd, w0);
    Trainer grda(c, obj, OptimizerKind::grda, w0);
    sgd.run_to(sgd.total_steps());
    grda.run_to(grda.total_steps());
    if (sgd.digest().value() != grda.digest().value()) throw NumericError("paired legs consumed different streams");

    const ZeroSpace zs = zero_space(full_spectrum(obj, sgd.weights()));
    const PruneScore sc = score(zs, sgd.weights());
    const double t = static_cast<double>(c.steps) * gammas[i];
    DeviationReport rep = verify_dp(sgd.weights(), grda.weights(), c.tuning.c, c.tuning.mu, gammas[i], t, sc);
    const fs::path stem = fs::path(out_dir) / ("dp_gamma_" + tag(gammas[i]));
    write_per_coordinate_csv(rep, sgd.weights(), grda.weights(), stem.string() + ".csv");
    const std::string json_path = stem.string() + ".json";
    open_out(json_path) << deviation_report_json(rep) << '\n';
    out.json_paths.push_back(json_path);
    out.zero_space_dims(static_cast<Index>(i)) = static_cast<double>(zs.rank());
    summary.push_back({{"gamma", gammas[i]},
                       {"steps", c.steps},
                       {"residual_inf", rep.residual_inf},
                       {"sgd_inf_norm", rep.sgd_inf_norm},
                       {"zero_space_dim", zs.rank()},
                       {"zero_tolerance", zs.tol_used}});
    out.reports.push_back(std::move(rep));
  }
  open_out(fs::path(out_dir) / "ladder.json") << summary.dump(2) << '\n';
  return out;
}

SpectrumResult hessian_spectrum(const RunConfig& cfg, const ParamVector& w, Index top, Index keep,
                                const LanczosOptions& opts) {
  const Problem problem = build_problem(cfg);
  const NetworkObjective obj(problem.spec, problem.train);
  require_same_dim(w.size(), obj.dim(), "hessian_spectrum");
  const Index k = std::min(top, obj.dim());
  SpectrumResult r;
  if (obj.dim() <= kDenseHessianLimit) {
    r.top = lanczos_topk(matrix_operator(dense_hessian(obj, w)), obj.dim(), k, opts);
  } else {
    r.top = lanczos_topk(hessian_operator(obj, w), obj.dim(), k, opts);
  }
  r.positive = keep_positive(r.top, keep);
  return r;
}

SpectrumResult spectrum_at_checkpoint(const RunConfig& cfg, const std::string& checkpoint_path, Index top, Index keep,
                                      const std::string& out_dir) {
  const Checkpoint ck = load_checkpoint(checkpoint_path);
  if (ck.config_hash != config_hash(cfg)) throw ConfigError("checkpoint", "config hash does not match the config");
  SpectrumResult r = hessian_spectrum(cfg, ck.state.w, top, keep);
  fs::create_directories(out_dir);
  const fs::path d(out_dir);
  write_spectrum_csv(r.top, (d / "eigenvalues.csv").string(), (d / "eigenvectors.csv").string());
  write_spectrum_csv(r.positive, (d / "positive_eigenvalues.csv").string(),
                     (d / "positive_eigenvectors.csv").string());
  return r;
}

std::vector<ProjectionRow> projection_series(const RunConfig& cfg, const std::string& out_dir, Index top_count,
                                             Index baseline_draws) {
  if (baseline_draws < 1) throw DomainError("projection_series: need at least one baseline draw");
  const Problem problem = build_problem(cfg);
  const NetworkObjective obj(problem.spec, problem.train);
  const ParamVector w0 = initial_weights(cfg);
  Trainer sgd(cfg, obj, OptimizerKind::sgd, w0);
  Trainer grda(cfg, obj, OptimizerKind::grda, w0);

  fs::create_directories(out_dir);
  auto os = open_out(fs::path(out_dir) / "projection.csv");
  os << "step,fraction,random_baseline,delta_norm,top_dim\n" << std::setprecision(17);
  std::vector<ProjectionRow> rows;
  while (!sgd.done()) {
    sgd.step();
    grda.step();
    if (sgd.step_count() % cfg.metrics_cadence != 0 && !sgd.done()) continue;
    const ParamVector delta = grda.weights() - sgd.weights();
    if (!(delta.norm() > 0.0)) continue;
    // Eigenvalues inside the zero tolerance are flat directions, not curvature.
    const Spectrum spectrum = full_spectrum(obj, sgd.weights());
    const double floor = zero_space(spectrum).tol_used;
    const TopSubspace top = TopSubspace::from_spectrum(spectrum, top_count, floor);
    ProjectionRow r;
    r.step = sgd.step_count();
    r.delta_norm = delta.norm();
    r.top_dim = top.rows.rows();
    r.fraction = r.top_dim > 0 ? projection_fraction(top, delta) : 0.0;
    Rng rng(hash_combine(cfg.seed_batch, r.step));
    double acc = 0.0;
    for (Index k = 0; k < baseline_draws; ++k) {
      ParamVector z(obj.dim());
      for (Index j = 0; j < z.size(); ++j) z(j) = rng.normal();
      acc += r.top_dim > 0 ? projection_fraction(top, z) : 0.0;
    }
    r.random_baseline = acc / static_cast<double>(baseline_draws);
    os << r.step << ',' << r.fraction << ',' << r.random_baseline << ',' << r.delta_norm << ',' << r.top_dim << '\n';
    rows.push_back(r);
  }
  return rows;
}

ConnectResult connect_endpoints(const RunConfig& cfg, const CurveTrainOptions& curve_opts, Index path_points,
                                Index plane_resolution, const std::string& out_dir) {
  const Problem problem = build_problem(cfg);
  const NetworkObjective obj(problem.spec, problem.train);
  const ParamVector w0 = initial_weights(cfg);
  Trainer sgd(cfg, obj, OptimizerKind::sgd, w0);
  Trainer grda(cfg, obj, OptimizerKind::grda, w0);
  sgd.run_to(sgd.total_steps());
  grda.run_to(grda.total_steps());

  ConnectResult r;
  const auto start = BezierCurve<double>::through_midpoint(sgd.weights(), grda.weights());
  r.curve = train_curve(obj, start, curve_opts);
  const Dataset* test = problem.test ? &*problem.test : nullptr;
  r.path = eval_path(r.curve, problem.spec, problem.train, test, path_points);
  r.chord = eval_path(start, problem.spec, problem.train, test, path_points);
  const PointMetric loss = [&](const ParamVector& w) { return obj.loss(w); };
  r.plane = plane_grid(r.curve.w1, r.curve.w2, r.curve.control, plane_resolution, loss, std::nullopt, 1.2, &r.curve);

  fs::create_directories(out_dir);
  const fs::path d(out_dir);
  write_path_csv(r.path, (d / "path.csv").string());
  write_path_csv(r.chord, (d / "chord.csv").string());
  write_plane_grid(r.plane, (d / "plane.csv").string(), (d / "plane.json").string());
  return r;
}

double gradcheck(const RunConfig& cfg, Index instances, double eps) {
  const Problem problem = build_problem(cfg);
  const MinibatchStream stream(hash_combine(cfg.seed_batch, 0x6763ULL), problem.train.size(), cfg.batch_size);
  double worst = 0.0;
  for (Index i = 0; i < instances; ++i) {
    const ParamVector w = init_params(problem.spec, hash_combine(cfg.seed_init, static_cast<std::uint64_t>(i)),
                                      cfg.init_scale);
    const auto batch = stream.batch_at(static_cast<std::uint64_t>(i));
    worst = std::max(worst, grad_check(problem.spec, w, problem.train, batch, eps));
  }
  return worst;
}

}  // namespace dprune
