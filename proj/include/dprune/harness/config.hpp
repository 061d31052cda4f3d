#pragma once

#include <dprune/nn/minibatch.hpp>
#include <dprune/nn/network.hpp>
#include <dprune/nn/synthetic.hpp>
#include <dprune/optim/grda.hpp>
#include <dprune/optim/schedule.hpp>

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace dprune {

inline constexpr int kConfigSchemaVersion = 1;

enum class OptimizerKind { sgd, grda };
std::string_view to_string(OptimizerKind k);
OptimizerKind parse_optimizer(std::string_view s);

enum class DataSource { synthetic, csv };

/// Everything needed to reproduce one run. Serialises to `key = value` lines;
/// parse(serialize(c)) == c for every valid config.
struct RunConfig {
  NetworkSpec network{{2, 1}, Activation::identity, LossKind::squared_error, true};

  DataSource data_source = DataSource::synthetic;
  SyntheticSpec data;             // data.seed seeds the dataset geometry and samples
  Index test_examples = 0;        // synthetic held-out split; 0 disables
  std::string train_csv;
  std::string test_csv;

  OptimizerKind optimizer = OptimizerKind::grda;
  TuningFn tuning{0.0, 0.51};
  LrSchedule schedule;            // schedule.base is the learning rate gamma
  Index epochs = 1;
  std::uint64_t steps = 0;        // overrides epochs when > 0
  Index batch_size = 1;
  Sampling sampling = Sampling::with_replacement;
  std::uint64_t seed_init = 0;
  std::uint64_t seed_batch = 0;
  double init_scale = 1.0;
  std::uint64_t metrics_cadence = 100;
  std::uint64_t checkpoint_every = 0;  // 0: final checkpoint only

  /// Throws ConfigError naming the offending key.
  void validate() const;

  bool operator==(const RunConfig&) const = default;
};

RunConfig parse_config(std::istream& is);
RunConfig load_config(const std::string& path);
std::string serialize(const RunConfig& cfg);
void save_config(const RunConfig& cfg, const std::string& path);

/// Set one dotted key from its textual value, with the same rules as the
/// file parser. Throws ConfigError for unknown keys or malformed values.
void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value);

/// FNV-1a of the canonical serialisation.
std::uint64_t config_hash(const RunConfig& cfg);
std::string hex64(std::uint64_t v);

/// Materialised data for a config.
struct Problem {
  NetworkSpec spec;
  Dataset train;
  std::optional<Dataset> test;
  std::optional<SyntheticData> geometry;  // synthetic sources only
};

Problem build_problem(const RunConfig& cfg);

/// Total optimizer steps implied by the config for a training set of size n.
std::uint64_t total_steps(const RunConfig& cfg, Index num_examples);

}  // namespace dprune
