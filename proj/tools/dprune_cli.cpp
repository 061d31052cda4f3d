#include <dprune/harness/pipelines.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace dprune;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct Overrides {
  std::string config_path;
  std::optional<std::string> gamma, c, mu, schedule, seed_init, seed_batch, epochs, batch_size;
  std::string out;

  void attach(CLI::App* app) {
    app->add_option("--config", config_path, "run configuration file")->required()->check(CLI::ExistingFile);
    app->add_option("--gamma", gamma, "base learning rate");
    app->add_option("--c", c, "threshold scale");
    app->add_option("--mu", mu, "threshold growth exponent");
    app->add_option("--schedule", schedule, "constant | constant_and_drop | garipov_linear");
    app->add_option("--seed-init", seed_init, "initialisation seed");
    app->add_option("--seed-batch", seed_batch, "minibatch stream seed");
    app->add_option("--epochs", epochs, "training epochs");
    app->add_option("--batch-size", batch_size, "minibatch size");
    app->add_option("--out", out, "output directory");
  }

  RunConfig load() const {
    RunConfig cfg = load_config(config_path);
    const std::pair<const char*, const std::optional<std::string>*> table[] = {
        {"gamma", &gamma},         {"grda.c", &c},         {"grda.mu", &mu},
        {"schedule", &schedule},   {"seed.init", &seed_init}, {"seed.batch", &seed_batch},
        {"epochs", &epochs},       {"batch_size", &batch_size},
    };
    for (const auto& [key, value] : table) {
      if (*value) set_config_value(cfg, key, **value);
    }
    cfg.validate();
    return cfg;
  }

  std::string out_dir(const RunConfig& cfg, const std::string& label) const {
    return out.empty() ? default_output_dir(cfg, label) : out;
  }
};

void print_notes(const RunConfig& cfg) {
  for (const auto& n : cfg.tuning.validate()) std::cerr << "note: " << n << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-averaging sparse training and directional-pruning analysis"};
  app.require_subcommand(1);

  Overrides train_o;
  std::optional<std::string> resume;
  auto* train = app.add_subcommand("train", "single optimizer run");
  train_o.attach(train);
  train->add_option("--resume", resume, "checkpoint to continue from")->check(CLI::ExistingFile);

  Overrides pair_o;
  auto* pair = app.add_subcommand("pair", "paired SGD / gRDA run on a shared minibatch stream");
  pair_o.attach(pair);

  Overrides dp_o;
  std::vector<double> ladder{1e-2, 1e-3, 1e-4};
  double horizon = 1.0;
  auto* verify = app.add_subcommand("verify-dp", "compare gRDA with directional pruning across a learning-rate ladder");
  dp_o.attach(verify);
  verify->add_option("--ladder", ladder, "learning rates")->delimiter(',');
  verify->add_option("--horizon", horizon, "training time steps x learning rate");

  Overrides sp_o;
  std::string checkpoint;
  Index top = 30;
  Index keep = 10;
  auto* spectrum = app.add_subcommand("spectrum", "Hessian eigenpairs at a checkpoint");
  sp_o.attach(spectrum);
  spectrum->add_option("--checkpoint", checkpoint, "checkpoint file")->required()->check(CLI::ExistingFile);
  spectrum->add_option("--top", top, "eigenpairs of largest magnitude");
  spectrum->add_option("--keep-positive", keep, "leading positive eigenpairs kept");

  Overrides pr_o;
  Index proj_top = 10;
  Index draws = 100;
  auto* project = app.add_subcommand("project", "top-eigenspace share of the SGD / gRDA deviation");
  pr_o.attach(project);
  project->add_option("--top", proj_top, "top positive eigenvectors");
  project->add_option("--baseline-draws", draws, "random directions in the baseline");

  Overrides cn_o;
  CurveTrainOptions curve;
  Index points = 61;
  Index resolution = 41;
  auto* connect = app.add_subcommand("connect", "Bezier curve between SGD and gRDA endpoints");
  cn_o.attach(connect);
  connect->add_option("--curve-epochs", curve.epochs, "curve training epochs");
  connect->add_option("--curve-lr", curve.learning_rate, "curve learning rate");
  connect->add_option("--curve-batch-size", curve.batch_size, "curve minibatch size");
  connect->add_option("--momentum", curve.momentum, "curve momentum");
  connect->add_option("--curve-seed", curve.seed, "curve sampling seed");
  connect->add_option("--points", points, "points along the path");
  connect->add_option("--resolution", resolution, "plane grid resolution");

  Overrides gc_o;
  Index instances = 100;
  double eps = 1e-6;
  double gc_tol = 1e-5;
  auto* gc = app.add_subcommand("gradcheck", "analytic gradient against central differences");
  gc_o.attach(gc);
  gc->add_option("--instances", instances, "random weight draws");
  gc->add_option("--eps", eps, "finite-difference step");
  gc->add_option("--tol", gc_tol, "pass threshold");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (train->parsed()) {
      const RunConfig cfg = train_o.load();
      print_notes(cfg);
      RunOptions o;
      o.out_dir = train_o.out_dir(cfg, "train");
      o.resume_from = resume;
      const RunResult r = run_experiment(cfg, o);
      std::cout << "steps " << r.steps << "\nmetrics " << r.metrics_path << "\ncheckpoint " << r.checkpoint_path << '\n';
    } else if (pair->parsed()) {
      const RunConfig cfg = pair_o.load();
      print_notes(cfg);
      const PairedResult r = paired_run(cfg, pair_o.out_dir(cfg, "pair"));
      std::cout << "streams_match " << (r.streams_match ? "true" : "false") << "\nreport " << r.report_path << '\n';
    } else if (verify->parsed()) {
      const RunConfig cfg = dp_o.load();
      print_notes(cfg);
      const LadderResult r = verify_dp_ladder(cfg, ladder, horizon, dp_o.out_dir(cfg, "verify-dp"));
      for (std::size_t i = 0; i < r.reports.size(); ++i) {
        std::cout << "gamma " << r.reports[i].gamma << " residual_inf " << r.reports[i].residual_inf << " report "
                  << r.json_paths[i] << '\n';
      }
    } else if (spectrum->parsed()) {
      const RunConfig cfg = sp_o.load();
      const SpectrumResult r = spectrum_at_checkpoint(cfg, checkpoint, top, keep, sp_o.out_dir(cfg, "spectrum"));
      for (Index i = 0; i < r.positive.size(); ++i) std::cout << r.positive.eigenvalues(i) << '\n';
    } else if (project->parsed()) {
      const RunConfig cfg = pr_o.load();
      const auto out = pr_o.out_dir(cfg, "project");
      const auto rows = projection_series(cfg, out, proj_top, draws);
      std::cout << "rows " << rows.size() << "\nseries " << (std::filesystem::path(out) / "projection.csv").string()
                << '\n';
    } else if (connect->parsed()) {
      const RunConfig cfg = cn_o.load();
      const ConnectResult r = connect_endpoints(cfg, curve, points, resolution, cn_o.out_dir(cfg, "connect"));
      double path_max = 0.0, chord_max = 0.0;
      for (double v : r.path.train_loss) path_max = std::max(path_max, v);
      for (double v : r.chord.train_loss) chord_max = std::max(chord_max, v);
      std::cout << "max_path_loss " << path_max << "\nmax_chord_loss " << chord_max << '\n';
    } else if (gc->parsed()) {
      const RunConfig cfg = gc_o.load();
      const double worst = gradcheck(cfg, instances, eps);
      std::cout << "max_relative_error " << worst << '\n';
      if (!(worst <= gc_tol)) return kExitNumeric;
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const DimensionError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
