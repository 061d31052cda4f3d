#pragma once

#include <dprune/harness/checkpoint.hpp>
#include <dprune/harness/config.hpp>
#include <dprune/nn/minibatch.hpp>

#include <optional>
#include <string>
#include <vector>

namespace dprune {

/// One optimizer leg stepping through its own minibatch stream.
class Trainer {
 public:
  Trainer(const RunConfig& cfg, const Objective& obj, OptimizerKind kind, const ParamVector& w0);

  /// One update. Throws NumericError if the weights become non-finite.
  void step();
  void run_to(std::uint64_t step);

  /// Learning rate used by the update with zero-based index `step_index`.
  double gamma_at(std::uint64_t step_index) const;

  Checkpoint checkpoint(std::uint64_t config_hash) const;
  void restore(const Checkpoint& ck);

  std::uint64_t step_count() const { return step_; }
  std::uint64_t total_steps() const { return total_; }
  std::uint64_t steps_per_epoch() const { return stream_.steps_per_epoch(); }
  bool done() const { return step_ >= total_; }
  OptimizerKind kind() const { return kind_; }
  const GrdaState<double>& state() const { return state_; }
  const ParamVector& weights() const { return state_.w; }
  const StreamDigest& digest() const { return digest_; }
  const std::vector<Index>& last_batch() const { return last_batch_; }

 private:
  const RunConfig& cfg_;
  const Objective& obj_;
  OptimizerKind kind_;
  MinibatchStream stream_;
  StreamDigest digest_;
  GrdaState<double> state_;
  std::uint64_t step_ = 0;
  std::uint64_t total_ = 0;
  std::vector<Index> last_batch_;
};

struct MetricsRow {
  std::uint64_t step = 0;
  std::uint64_t epoch = 0;
  double train_loss = 0.0;
  double train_acc = 0.0;   // NaN for regression
  double test_loss = 0.0;   // NaN when not evaluated at this row
  double test_acc = 0.0;
  double sparsity = 0.0;
  double l2_l1_ratio = 0.0;
  double l2_l1_lower = 0.0;
  double gamma = 0.0;       // rate of the most recent update
  double g_tilde = 0.0;
};

/// Test metrics are evaluated only at epoch boundaries.
MetricsRow measure(const Trainer& tr, const Problem& problem);
std::string metrics_header();
std::string format_metrics_row(const MetricsRow& r);

struct RunOptions {
  std::string out_dir;
  std::optional<std::string> resume_from;
  std::optional<OptimizerKind> optimizer;  // overrides cfg.optimizer
  std::optional<ParamVector> initial_weights;
};

struct RunResult {
  OptimizerKind optimizer = OptimizerKind::grda;
  GrdaState<double> final_state;
  std::uint64_t steps = 0;
  std::uint64_t stream_digest = 0;
  std::uint64_t stream_batches = 0;
  std::vector<MetricsRow> rows;
  std::string metrics_path;
  std::string checkpoint_path;
  std::string manifest_path;
  std::vector<std::string> notes;
};

/// Runs to completion writing config.txt, metrics.csv, checkpoints and
/// manifest.json under `out_dir`. A resumed run appends only rows after the
/// checkpoint step. On failure the manifest records the status and the last
/// checkpoint before the exception propagates.
RunResult run_experiment(const RunConfig& cfg, const RunOptions& opts);

struct PairedResult {
  RunResult sgd;
  RunResult grda;
  bool streams_match = false;
  std::string report_path;
};

/// SGD and gRDA from the same initial weights, each consuming its own
/// instance of the same minibatch stream; the stream digests are compared.
PairedResult paired_run(const RunConfig& cfg, const std::string& out_dir);

/// `$DPRUNE_OUT_ROOT/<label>-<config hash>`, with `runs` as the fallback root.
std::string default_output_dir(const RunConfig& cfg, const std::string& label);

ParamVector initial_weights(const RunConfig& cfg);

}  // namespace dprune
