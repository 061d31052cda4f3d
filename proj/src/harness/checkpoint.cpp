#include <dprune/harness/checkpoint.hpp>

#include <json.hpp>

#include <array>
#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>

namespace dprune {

namespace {

constexpr std::array<char, 8> kMagic = {'D', 'P', 'R', 'C', 'K', 'P', 'T', '1'};

void put_u64(std::string& out, std::uint64_t x) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((x >> (8 * i)) & 0xff));
}

std::uint64_t get_u64(const char* p) {
  std::uint64_t x = 0;
  for (int i = 0; i < 8; ++i) x |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
  return x;
}

void put_doubles(std::string& out, const double* xs, Index n) {
  for (Index i = 0; i < n; ++i) put_u64(out, std::bit_cast<std::uint64_t>(xs[i]));
}

void get_doubles(const char* p, double* xs, Index n) {
  for (Index i = 0; i < n; ++i) xs[i] = std::bit_cast<double>(get_u64(p + 8 * i));
}

}  // namespace

void save_checkpoint(const Checkpoint& ck, const std::string& path) {
  const Index d = ck.state.w.size();
  require_same_dim(d, ck.state.v.size(), "checkpoint v");
  require_same_dim(d, ck.state.w0.size(), "checkpoint w0");
  const auto bytes = static_cast<std::uint64_t>(8 * d);

  nlohmann::ordered_json h;
  h["format"] = "dprune-checkpoint";
  h["version"] = 1;
  h["dimension"] = d;
  h["config_hash"] = hex64(ck.config_hash);
  h["optimizer"] = std::string(to_string(ck.optimizer));
  h["step"] = ck.step;
  h["n"] = ck.state.n;
  h["c"] = ck.tuning.c;
  h["mu"] = ck.tuning.mu;
  h["schedule"] = {{"kind", std::string(to_string(ck.schedule.kind))}, {"base", ck.schedule.base}};
  auto drops = nlohmann::ordered_json::array();
  for (const auto& dr : ck.schedule.drops) drops.push_back({dr.at_fraction, dr.factor});
  h["schedule"]["drops"] = drops;
  h["stream"] = {{"seed", ck.stream_seed},
                 {"position", ck.stream_position},
                 {"digest", hex64(ck.stream_digest)},
                 {"batches", ck.stream_batches}};
  h["fields"] = {{"w", {{"offset", 0}, {"count", d}}},
                 {"v", {{"offset", bytes}, {"count", d}}},
                 {"w0", {{"offset", 2 * bytes}, {"count", d}}},
                 {"scalars", {{"offset", 3 * bytes}, {"names", {"g_tilde", "threshold_offset", "last_gamma"}}}}};
  const std::string header = h.dump();

  std::string blob(kMagic.begin(), kMagic.end());
  put_u64(blob, header.size());
  blob += header;
  put_doubles(blob, ck.state.w.data(), d);
  put_doubles(blob, ck.state.v.data(), d);
  put_doubles(blob, ck.state.w0.data(), d);
  const double scalars[3] = {ck.state.g_tilde, ck.state.threshold_offset, ck.state.last_gamma};
  put_doubles(blob, scalars, 3);

  const std::string tmp = path + ".tmp";
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot open '" + tmp + "' for writing");
    os.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!os) throw std::runtime_error("write failed for '" + tmp + "'");
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) throw std::runtime_error("cannot move checkpoint into '" + path + "'");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open checkpoint '" + path + "'");
  const std::string blob((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (blob.size() < 16 || std::memcmp(blob.data(), kMagic.data(), kMagic.size()) != 0) {
    throw std::runtime_error("'" + path + "' is not a checkpoint");
  }
  const std::uint64_t hlen = get_u64(blob.data() + 8);
  if (blob.size() < 16 + hlen) throw std::runtime_error("truncated checkpoint header in '" + path + "'");
  const auto h = nlohmann::json::parse(blob.begin() + 16, blob.begin() + 16 + static_cast<std::ptrdiff_t>(hlen));
  const Index d = h.at("dimension").get<Index>();
  const std::size_t base = 16 + hlen;
  if (blob.size() != base + 8 * static_cast<std::size_t>(3 * d + 3)) {
    throw std::runtime_error("checkpoint '" + path + "' has the wrong payload size");
  }
  Checkpoint ck;
  ck.config_hash = std::stoull(h.at("config_hash").get<std::string>(), nullptr, 16);
  ck.optimizer = parse_optimizer(h.at("optimizer").get<std::string>());
  ck.step = h.at("step").get<std::uint64_t>();
  ck.state.n = h.at("n").get<std::uint64_t>();
  ck.tuning = {h.at("c").get<double>(), h.at("mu").get<double>()};
  ck.schedule.kind = parse_schedule_kind(h.at("schedule").at("kind").get<std::string>());
  ck.schedule.base = h.at("schedule").at("base").get<double>();
  for (const auto& dr : h.at("schedule").at("drops")) ck.schedule.drops.push_back({dr.at(0).get<double>(), dr.at(1).get<double>()});
  const auto& st = h.at("stream");
  ck.stream_seed = st.at("seed").get<std::uint64_t>();
  ck.stream_position = st.at("position").get<std::uint64_t>();
  ck.stream_digest = std::stoull(st.at("digest").get<std::string>(), nullptr, 16);
  ck.stream_batches = st.at("batches").get<std::uint64_t>();

  const auto& f = h.at("fields");
  const auto read_vec = [&](const char* name) {
    ParamVector x(d);
    get_doubles(blob.data() + base + f.at(name).at("offset").get<std::size_t>(), x.data(), d);
    return x;
  };
  ck.state.w = read_vec("w");
  ck.state.v = read_vec("v");
  ck.state.w0 = read_vec("w0");
  double scalars[3];
  get_doubles(blob.data() + base + f.at("scalars").at("offset").get<std::size_t>(), scalars, 3);
  ck.state.g_tilde = scalars[0];
  ck.state.threshold_offset = scalars[1];
  ck.state.last_gamma = scalars[2];
  return ck;
}

}  // namespace dprune
