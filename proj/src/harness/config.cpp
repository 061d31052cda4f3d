#include <dprune/harness/config.hpp>
#include <dprune/nn/dataset_io.hpp>

#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <limits>
#include <map>
#include <set>
#include <sstream>

namespace dprune {

std::string_view to_string(OptimizerKind k) { return k == OptimizerKind::sgd ? "sgd" : "grda"; }

OptimizerKind parse_optimizer(std::string_view s) {
  if (s == "sgd") return OptimizerKind::sgd;
  if (s == "grda") return OptimizerKind::grda;
  throw DomainError("unknown optimizer '" + std::string(s) + "'");
}

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

double to_double(std::string_view key, std::string_view v) {
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError(std::string(key), "expected a number, got '" + std::string(v) + "'");
  }
  return x;
}

std::uint64_t to_u64(std::string_view key, std::string_view v) {
  std::uint64_t x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError(std::string(key), "expected a non-negative integer, got '" + std::string(v) + "'");
  }
  return x;
}

Index to_index(std::string_view key, std::string_view v) {
  const auto x = to_u64(key, v);
  if (x > static_cast<std::uint64_t>(std::numeric_limits<Index>::max())) throw ConfigError(std::string(key), "value too large");
  return static_cast<Index>(x);
}

bool to_bool(std::string_view key, std::string_view v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError(std::string(key), "expected true or false, got '" + std::string(v) + "'");
}

std::string fmt(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, r.ptr);
}

template <typename Parse>
auto wrap(std::string_view key, Parse&& parse) {
  try {
    return parse();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(std::string(key), e.what());
  }
}

using Setter = std::function<void(RunConfig&, std::string_view key, std::string_view value)>;

const std::map<std::string, Setter, std::less<>>& setters() {
  static const std::map<std::string, Setter, std::less<>> table = {
      {"schema_version",
       [](RunConfig&, std::string_view k, std::string_view v) {
         if (to_u64(k, v) != static_cast<std::uint64_t>(kConfigSchemaVersion)) {
           throw ConfigError(std::string(k), "unsupported schema version " + std::string(v));
         }
       }},
      {"network.widths",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.network.layer_widths.clear();
         for (auto part : split(v, ',')) c.network.layer_widths.push_back(to_index(k, part));
       }},
      {"network.activation",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.network.activation = wrap(k, [&] { return parse_activation(v); });
       }},
      {"network.loss",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.network.loss = wrap(k, [&] { return parse_loss(v); }); }},
      {"network.bias", [](RunConfig& c, std::string_view k, std::string_view v) { c.network.use_bias = to_bool(k, v); }},
      {"data.source",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "synthetic") c.data_source = DataSource::synthetic;
         else if (v == "csv") c.data_source = DataSource::csv;
         else throw ConfigError(std::string(k), "expected synthetic or csv");
       }},
      {"data.kind",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.data.kind = wrap(k, [&] { return parse_synthetic_kind(v); });
       }},
      {"data.seed", [](RunConfig& c, std::string_view k, std::string_view v) { c.data.seed = to_u64(k, v); }},
      {"data.n", [](RunConfig& c, std::string_view k, std::string_view v) { c.data.num_examples = to_index(k, v); }},
      {"data.dim", [](RunConfig& c, std::string_view k, std::string_view v) { c.data.dim = to_index(k, v); }},
      {"data.rank", [](RunConfig& c, std::string_view k, std::string_view v) { c.data.rank = to_index(k, v); }},
      {"data.classes", [](RunConfig& c, std::string_view k, std::string_view v) { c.data.classes = to_index(k, v); }},
      {"data.noise", [](RunConfig& c, std::string_view k, std::string_view v) { c.data.noise = to_double(k, v); }},
      {"data.spread", [](RunConfig& c, std::string_view k, std::string_view v) { c.data.spread = to_double(k, v); }},
      {"data.test_n", [](RunConfig& c, std::string_view k, std::string_view v) { c.test_examples = to_index(k, v); }},
      {"data.train_csv", [](RunConfig& c, std::string_view, std::string_view v) { c.train_csv = std::string(v); }},
      {"data.test_csv", [](RunConfig& c, std::string_view, std::string_view v) { c.test_csv = std::string(v); }},
      {"optimizer",
       [](RunConfig& c, std::string_view k, std::string_view v) { c.optimizer = wrap(k, [&] { return parse_optimizer(v); }); }},
      {"grda.c", [](RunConfig& c, std::string_view k, std::string_view v) { c.tuning.c = to_double(k, v); }},
      {"grda.mu", [](RunConfig& c, std::string_view k, std::string_view v) { c.tuning.mu = to_double(k, v); }},
      {"gamma", [](RunConfig& c, std::string_view k, std::string_view v) { c.schedule.base = to_double(k, v); }},
      {"schedule",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.schedule.kind = wrap(k, [&] { return parse_schedule_kind(v); });
       }},
      {"schedule.drops",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         c.schedule.drops.clear();
         if (v.empty()) return;
         for (auto part : split(v, ',')) {
           const auto fields = split(part, ':');
           if (fields.size() != 2) throw ConfigError(std::string(k), "expected fraction:factor pairs");
           c.schedule.drops.push_back({to_double(k, fields[0]), to_double(k, fields[1])});
         }
       }},
      {"epochs", [](RunConfig& c, std::string_view k, std::string_view v) { c.epochs = to_index(k, v); }},
      {"steps", [](RunConfig& c, std::string_view k, std::string_view v) { c.steps = to_u64(k, v); }},
      {"batch_size", [](RunConfig& c, std::string_view k, std::string_view v) { c.batch_size = to_index(k, v); }},
      {"sampling",
       [](RunConfig& c, std::string_view k, std::string_view v) {
         if (v == "with_replacement") c.sampling = Sampling::with_replacement;
         else if (v == "epoch_shuffle") c.sampling = Sampling::epoch_shuffle;
         else throw ConfigError(std::string(k), "expected with_replacement or epoch_shuffle");
       }},
      {"seed.init", [](RunConfig& c, std::string_view k, std::string_view v) { c.seed_init = to_u64(k, v); }},
      {"seed.batch", [](RunConfig& c, std::string_view k, std::string_view v) { c.seed_batch = to_u64(k, v); }},
      {"init.scale", [](RunConfig& c, std::string_view k, std::string_view v) { c.init_scale = to_double(k, v); }},
      {"metrics.cadence", [](RunConfig& c, std::string_view k, std::string_view v) { c.metrics_cadence = to_u64(k, v); }},
      {"checkpoint.every", [](RunConfig& c, std::string_view k, std::string_view v) { c.checkpoint_every = to_u64(k, v); }},
  };
  return table;
}

}  // namespace

void set_config_value(RunConfig& cfg, std::string_view key, std::string_view value) {
  const auto& table = setters();
  const auto it = table.find(key);
  if (it == table.end()) throw ConfigError(std::string(key), "unknown key");
  it->second(cfg, key, trim(value));
}

void RunConfig::validate() const {
  wrap("network", [&] { network.validate(); return 0; });
  if (data_source == DataSource::synthetic) {
    if (data.num_examples < 1) throw ConfigError("data.n", "must be >= 1");
    if (data.dim < 1) throw ConfigError("data.dim", "must be >= 1");
    if (data.dim != network.input_dim()) throw ConfigError("network.widths", "input width must equal data.dim");
    if (data.kind == SyntheticKind::rank_deficient_regression) {
      if (data.rank < 1 || data.rank > data.dim) throw ConfigError("data.rank", "must lie in [1, data.dim]");
      if (network.loss != LossKind::squared_error) throw ConfigError("network.loss", "regression data needs squared_error");
    } else {
      if (data.classes < 2) throw ConfigError("data.classes", "must be >= 2");
      if (network.output_dim() != data.classes) throw ConfigError("network.widths", "output width must equal data.classes");
    }
    if (!(data.noise >= 0.0)) throw ConfigError("data.noise", "must be >= 0");
  } else if (train_csv.empty()) {
    throw ConfigError("data.train_csv", "required when data.source = csv");
  }
  wrap("grda", [&] { tuning.validate(); return 0; });
  if (!(schedule.base > 0.0)) throw ConfigError("gamma", "must be positive");
  wrap("schedule", [&] { schedule.validate(); return 0; });
  if (steps == 0 && epochs < 1) throw ConfigError("epochs", "must be >= 1 unless steps is set");
  if (batch_size < 1) throw ConfigError("batch_size", "must be >= 1");
  if (!(init_scale > 0.0)) throw ConfigError("init.scale", "must be positive");
  if (metrics_cadence < 1) throw ConfigError("metrics.cadence", "must be >= 1");
}

RunConfig parse_config(std::istream& is) {
  RunConfig cfg;
  std::set<std::string, std::less<>> seen;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    std::string_view s = line;
    if (const auto hash = s.find('#'); hash != std::string_view::npos) s = s.substr(0, hash);
    s = trim(s);
    if (s.empty()) continue;
    const auto eq = s.find('=');
    if (eq == std::string_view::npos) {
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected 'key = value'");
    }
    const auto key = trim(s.substr(0, eq));
    if (!seen.insert(std::string(key)).second) throw ConfigError(std::string(key), "duplicate key");
    set_config_value(cfg, key, s.substr(eq + 1));
  }
  if (!seen.contains("schema_version")) throw ConfigError("schema_version", "missing");
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("", "cannot open config '" + path + "'");
  return parse_config(is);
}

std::string serialize(const RunConfig& c) {
  std::ostringstream os;
  os << "schema_version = " << kConfigSchemaVersion << '\n';
  os << "network.widths = ";
  for (std::size_t i = 0; i < c.network.layer_widths.size(); ++i) os << (i ? "," : "") << c.network.layer_widths[i];
  os << '\n';
  os << "network.activation = " << to_string(c.network.activation) << '\n';
  os << "network.loss = " << to_string(c.network.loss) << '\n';
  os << "network.bias = " << (c.network.use_bias ? "true" : "false") << '\n';
  os << "data.source = " << (c.data_source == DataSource::synthetic ? "synthetic" : "csv") << '\n';
  os << "data.kind = " << to_string(c.data.kind) << '\n';
  os << "data.seed = " << c.data.seed << '\n';
  os << "data.n = " << c.data.num_examples << '\n';
  os << "data.dim = " << c.data.dim << '\n';
  os << "data.rank = " << c.data.rank << '\n';
  os << "data.classes = " << c.data.classes << '\n';
  os << "data.noise = " << fmt(c.data.noise) << '\n';
  os << "data.spread = " << fmt(c.data.spread) << '\n';
  os << "data.test_n = " << c.test_examples << '\n';
  os << "data.train_csv = " << c.train_csv << '\n';
  os << "data.test_csv = " << c.test_csv << '\n';
  os << "optimizer = " << to_string(c.optimizer) << '\n';
  os << "grda.c = " << fmt(c.tuning.c) << '\n';
  os << "grda.mu = " << fmt(c.tuning.mu) << '\n';
  os << "gamma = " << fmt(c.schedule.base) << '\n';
  os << "schedule = " << to_string(c.schedule.kind) << '\n';
  os << "schedule.drops = ";
  for (std::size_t i = 0; i < c.schedule.drops.size(); ++i) {
    os << (i ? "," : "") << fmt(c.schedule.drops[i].at_fraction) << ':' << fmt(c.schedule.drops[i].factor);
  }
  os << '\n';
  os << "epochs = " << c.epochs << '\n';
  os << "steps = " << c.steps << '\n';
  os << "batch_size = " << c.batch_size << '\n';
  os << "sampling = " << (c.sampling == Sampling::with_replacement ? "with_replacement" : "epoch_shuffle") << '\n';
  os << "seed.init = " << c.seed_init << '\n';
  os << "seed.batch = " << c.seed_batch << '\n';
  os << "init.scale = " << fmt(c.init_scale) << '\n';
  os << "metrics.cadence = " << c.metrics_cadence << '\n';
  os << "checkpoint.every = " << c.checkpoint_every << '\n';
  return os.str();
}

void save_config(const RunConfig& cfg, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << serialize(cfg);
}

std::uint64_t config_hash(const RunConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : serialize(cfg)) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

Problem build_problem(const RunConfig& cfg) {
  cfg.validate();
  Problem p;
  p.spec = cfg.network;
  if (cfg.data_source == DataSource::csv) {
    p.train = read_dataset_csv(cfg.train_csv);
    if (!cfg.test_csv.empty()) p.test = read_dataset_csv(cfg.test_csv);
    if (p.train.inputs.cols() != p.spec.input_dim()) {
      throw ConfigError("data.train_csv", "column count does not match the network input width");
    }
    return p;
  }
  SyntheticData train = make_synthetic(cfg.data, 0);
  p.train = train.data;
  if (cfg.test_examples > 0) {
    SyntheticSpec test_spec = cfg.data;
    test_spec.num_examples = cfg.test_examples;
    p.test = make_synthetic(test_spec, 1).data;
  }
  p.geometry = std::move(train);
  return p;
}

std::uint64_t total_steps(const RunConfig& cfg, Index num_examples) {
  if (cfg.steps > 0) return cfg.steps;
  const auto n = static_cast<std::uint64_t>(num_examples);
  const auto b = static_cast<std::uint64_t>(cfg.batch_size);
  return (n + b - 1) / b * static_cast<std::uint64_t>(cfg.epochs);
}

}  // namespace dprune
