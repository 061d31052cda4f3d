#include <dprune/harness/runner.hpp>
#include <dprune/pruning/directional.hpp>

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace dprune {

namespace fs = std::filesystem;

Trainer::Trainer(const RunConfig& cfg, const Objective& obj, OptimizerKind kind, const ParamVector& w0)
    : cfg_(cfg),
      obj_(obj),
      kind_(kind),
      stream_(cfg.seed_batch, obj.num_examples(), cfg.batch_size, cfg.sampling),
      state_(GrdaState<double>::init(w0)),
      total_(dprune::total_steps(cfg, obj.num_examples())) {
  require_same_dim(w0.size(), obj.dim(), "trainer initial weights");
}

double Trainer::gamma_at(std::uint64_t step_index) const {
  const double fraction = total_ == 0 ? 0.0 : static_cast<double>(step_index) / static_cast<double>(total_);
  return lr_at(cfg_.schedule, std::min(fraction, 1.0));
}

void Trainer::step() {
  last_batch_ = stream_.next_batch();
  digest_.absorb(last_batch_);
  const double gamma = gamma_at(step_);
  const ParamVector grad = obj_.gradient(state_.w, last_batch_);
  if (kind_ == OptimizerKind::sgd) {
    state_.w = sgd_step(state_.w, grad, gamma);
    state_.v = state_.w;
    state_.n += 1;
    state_.last_gamma = gamma;
  } else {
    grda_step_scheduled(state_, grad, gamma, cfg_.tuning);
  }
  ++step_;
  if (!state_.w.allFinite() || !state_.v.allFinite()) {
    throw NumericError("non-finite weights at step " + std::to_string(step_));
  }
}

void Trainer::run_to(std::uint64_t step) {
  while (step_ < step) this->step();
}

Checkpoint Trainer::checkpoint(std::uint64_t config_hash) const {
  Checkpoint ck;
  ck.config_hash = config_hash;
  ck.optimizer = kind_;
  ck.step = step_;
  ck.state = state_;
  ck.tuning = cfg_.tuning;
  ck.schedule = cfg_.schedule;
  ck.stream_seed = stream_.seed();
  ck.stream_position = stream_.position();
  ck.stream_digest = digest_.value();
  ck.stream_batches = digest_.batches();
  return ck;
}

void Trainer::restore(const Checkpoint& ck) {
  if (ck.optimizer != kind_) throw ConfigError("optimizer", "checkpoint was written by a different optimizer");
  if (ck.stream_seed != stream_.seed()) throw ConfigError("seed.batch", "checkpoint stream seed differs");
  require_same_dim(ck.state.w.size(), obj_.dim(), "checkpoint dimension");
  state_ = ck.state;
  step_ = ck.step;
  stream_.seek(ck.stream_position);
  digest_ = StreamDigest::resume(ck.stream_digest, ck.stream_batches);
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string num(double x) {
  if (std::isnan(x)) return "";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

void write_manifest(const std::string& path, const RunConfig& cfg, OptimizerKind kind, const std::string& status,
                    std::uint64_t step, const std::vector<std::string>& files, const std::string& last_checkpoint,
                    const std::vector<std::string>& notes, const std::string& error) {
  nlohmann::ordered_json j;
  j["status"] = status;
  j["config_hash"] = hex64(config_hash(cfg));
  j["optimizer"] = std::string(to_string(kind));
  j["step"] = step;
  j["files"] = files;
  j["last_checkpoint"] = last_checkpoint;
  j["notes"] = notes;
  if (!error.empty()) j["error"] = error;
  std::ofstream os(path);
  if (os) os << j.dump(2) << '\n';
}

}  // namespace

MetricsRow measure(const Trainer& tr, const Problem& problem) {
  MetricsRow r;
  const ParamVector& w = tr.weights();
  r.step = tr.step_count();
  const auto spe = tr.steps_per_epoch();
  r.epoch = r.step / spe;
  r.train_loss = forward(problem.spec, w, problem.train);
  r.train_acc = accuracy(problem.spec, w, problem.train);
  r.test_loss = kNaN;
  r.test_acc = kNaN;
  if (problem.test && r.step % spe == 0) {
    r.test_loss = forward(problem.spec, w, *problem.test);
    r.test_acc = accuracy(problem.spec, w, *problem.test);
  }
  r.sparsity = sparsity(w);
  if ((w.array() != 0.0).any()) {
    const NormRatio nr = ratio_l2_l1(w);
    r.l2_l1_ratio = nr.ratio;
    r.l2_l1_lower = nr.lower_bound;
  } else {
    r.l2_l1_ratio = kNaN;
    r.l2_l1_lower = kNaN;
  }
  r.gamma = r.step == 0 ? tr.gamma_at(0) : tr.gamma_at(r.step - 1);
  r.g_tilde = tr.state().g_tilde;
  return r;
}

std::string metrics_header() {
  return "step,epoch,train_loss,train_acc,test_loss,test_acc,sparsity,l2_l1_ratio,l2_l1_lower,gamma,g_tilde";
}

std::string format_metrics_row(const MetricsRow& r) {
  std::ostringstream os;
  os << r.step << ',' << r.epoch << ',' << num(r.train_loss) << ',' << num(r.train_acc) << ',' << num(r.test_loss)
     << ',' << num(r.test_acc) << ',' << num(r.sparsity) << ',' << num(r.l2_l1_ratio) << ',' << num(r.l2_l1_lower)
     << ',' << num(r.gamma) << ',' << num(r.g_tilde);
  return os.str();
}

ParamVector initial_weights(const RunConfig& cfg) {
  return init_params(cfg.network, cfg.seed_init, cfg.init_scale);
}

RunResult run_experiment(const RunConfig& cfg, const RunOptions& opts) {
  cfg.validate();
  const OptimizerKind kind = opts.optimizer.value_or(cfg.optimizer);
  const std::uint64_t hash = config_hash(cfg);
  const Problem problem = build_problem(cfg);
  const NetworkObjective objective(problem.spec, problem.train);

  const fs::path out(opts.out_dir);
  fs::create_directories(out / "checkpoints");
  RunResult result;
  result.optimizer = kind;
  result.notes = cfg.tuning.validate();
  result.metrics_path = (out / "metrics.csv").string();
  result.manifest_path = (out / "manifest.json").string();
  std::vector<std::string> files;
  std::string last_checkpoint;

  Trainer tr(cfg, objective, kind, opts.initial_weights.value_or(initial_weights(cfg)));
  if (opts.resume_from) {
    const Checkpoint ck = load_checkpoint(*opts.resume_from);
    if (ck.config_hash != hash) throw ConfigError("resume", "checkpoint config hash does not match the config");
    tr.restore(ck);
    last_checkpoint = *opts.resume_from;
  }

  const auto save = [&](const std::string& name) {
    const std::string p = (out / "checkpoints" / name).string();
    save_checkpoint(tr.checkpoint(hash), p);
    files.push_back(p);
    last_checkpoint = p;
  };

  try {
    save_config(cfg, (out / "config.txt").string());
    files.push_back((out / "config.txt").string());
    std::ofstream metrics(result.metrics_path, std::ios::trunc);
    if (!metrics) throw std::runtime_error("cannot open '" + result.metrics_path + "' for writing");
    files.push_back(result.metrics_path);
    metrics << metrics_header() << '\n';
    const auto log_row = [&] {
      const MetricsRow row = measure(tr, problem);
      if (!std::isfinite(row.train_loss)) throw NumericError("non-finite training loss at step " + std::to_string(row.step));
      metrics << format_metrics_row(row) << '\n';
      metrics.flush();
      if (!metrics) throw std::runtime_error("write failed for '" + result.metrics_path + "'");
      result.rows.push_back(row);
    };
    if (!opts.resume_from) log_row();
    while (!tr.done()) {
      tr.step();
      const auto s = tr.step_count();
      if (s % cfg.metrics_cadence == 0) log_row();
      if (cfg.checkpoint_every > 0 && s % cfg.checkpoint_every == 0 && s < tr.total_steps()) {
        save("step_" + std::to_string(s) + ".ckpt");
      }
    }
    save("final.ckpt");
  } catch (const NumericError& e) {
    write_manifest(result.manifest_path, cfg, kind, "numeric_failure", tr.step_count(), files, last_checkpoint,
                   result.notes, e.what());
    throw;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    write_manifest(result.manifest_path, cfg, kind, "io_failure", tr.step_count(), files, last_checkpoint,
                   result.notes, e.what());
    throw;
  }

  result.final_state = tr.state();
  result.steps = tr.step_count();
  result.stream_digest = tr.digest().value();
  result.stream_batches = tr.digest().batches();
  result.checkpoint_path = last_checkpoint;
  write_manifest(result.manifest_path, cfg, kind, "ok", result.steps, files, last_checkpoint, result.notes, "");
  return result;
}

PairedResult paired_run(const RunConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  const ParamVector w0 = initial_weights(cfg);
  PairedResult pr;
  RunOptions o;
  o.initial_weights = w0;
  o.out_dir = (fs::path(out_dir) / "sgd").string();
  o.optimizer = OptimizerKind::sgd;
  pr.sgd = run_experiment(cfg, o);
  o.out_dir = (fs::path(out_dir) / "grda").string();
  o.optimizer = OptimizerKind::grda;
  pr.grda = run_experiment(cfg, o);
  pr.streams_match = pr.sgd.stream_digest == pr.grda.stream_digest && pr.sgd.stream_batches == pr.grda.stream_batches;

  nlohmann::ordered_json j;
  j["config_hash"] = hex64(config_hash(cfg));
  j["sgd"] = {{"stream_digest", hex64(pr.sgd.stream_digest)}, {"batches", pr.sgd.stream_batches},
              {"final_sparsity", sparsity(pr.sgd.final_state.w)}};
  j["grda"] = {{"stream_digest", hex64(pr.grda.stream_digest)}, {"batches", pr.grda.stream_batches},
               {"final_sparsity", sparsity(pr.grda.final_state.w)}};
  j["streams_match"] = pr.streams_match;
  j["identical_weights"] = pr.sgd.final_state.w == pr.grda.final_state.w;
  pr.report_path = (fs::path(out_dir) / "pair.json").string();
  std::ofstream os(pr.report_path);
  if (!os) throw std::runtime_error("cannot open '" + pr.report_path + "' for writing");
  os << j.dump(2) << '\n';
  if (!pr.streams_match) throw NumericError("paired legs consumed different minibatch streams");
  return pr;
}

std::string default_output_dir(const RunConfig& cfg, const std::string& label) {
  const char* root = std::getenv("DPRUNE_OUT_ROOT");
  const fs::path base = root && *root ? fs::path(root) : fs::path("runs");
  return (base / (label + "-" + hex64(config_hash(cfg)))).string();
}

}  // namespace dprune
