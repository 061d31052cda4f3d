#pragma once

#include <dprune/linalg.hpp>

#include <cstdint>
#include <vector>

namespace dprune {

enum class Sampling {
  with_replacement,  // i.i.d. uniform indices, the default for theory runs
  epoch_shuffle,     // one random permutation per epoch
};

/// Seeded source of minibatch row indices. The batch drawn at step k is a
/// pure function of (seed, N, batch_size, sampling, k), so a stream can be
/// rebuilt at any position without replaying earlier draws.
class MinibatchStream {
 public:
  MinibatchStream(std::uint64_t seed, Index num_examples, Index batch_size,
                  Sampling sampling = Sampling::with_replacement, std::uint64_t position = 0);

  /// Indices for the current position (0-based rows), then advance by one.
  std::vector<Index> next_batch();

  /// Batch at an arbitrary position; does not touch the stream.
  std::vector<Index> batch_at(std::uint64_t position) const;

  std::uint64_t position() const { return position_; }
  void seek(std::uint64_t position) { position_ = position; }

  std::uint64_t seed() const { return seed_; }
  Index num_examples() const { return n_; }
  Index batch_size() const { return batch_size_; }
  Sampling sampling() const { return sampling_; }
  /// Steps per epoch: ceil(N / batch_size).
  std::uint64_t steps_per_epoch() const;

 private:
  std::vector<Index> permutation(std::uint64_t epoch) const;

  std::uint64_t seed_;
  Index n_;
  Index batch_size_;
  Sampling sampling_;
  std::uint64_t position_;
};

/// Order-sensitive running hash of batch indices; two optimizer legs that
/// consumed the same batches end with the same digest.
class StreamDigest {
 public:
  static StreamDigest resume(std::uint64_t value, std::uint64_t batches) {
    StreamDigest d;
    d.h_ = value;
    d.count_ = batches;
    return d;
  }

  void absorb(const std::vector<Index>& batch);
  std::uint64_t value() const { return h_; }
  std::uint64_t batches() const { return count_; }

 private:
  std::uint64_t h_ = 0xcbf29ce484222325ULL;
  std::uint64_t count_ = 0;
};

}  // namespace dprune
