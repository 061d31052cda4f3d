#pragma once

#include <dprune/harness/config.hpp>

#include <cstdint>
#include <string>

namespace dprune {

/// Complete resumable state of one optimizer leg. For SGD, `state.v` mirrors
/// `state.w` and the threshold fields stay zero.
struct Checkpoint {
  std::uint64_t config_hash = 0;
  OptimizerKind optimizer = OptimizerKind::grda;
  std::uint64_t step = 0;
  GrdaState<double> state;
  TuningFn tuning;
  LrSchedule schedule;
  std::uint64_t stream_seed = 0;
  std::uint64_t stream_position = 0;
  std::uint64_t stream_digest = 0;
  std::uint64_t stream_batches = 0;
};

/// File layout: 8-byte magic, little-endian u64 header length, JSON header
/// (dimension, field offsets, hash), then w, v, w0 and the threshold scalars
/// as little-endian IEEE doubles.
void save_checkpoint(const Checkpoint& ck, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace dprune
