#include <dprune/error.hpp>
#include <dprune/nn/minibatch.hpp>
#include <dprune/nn/random.hpp>

#include <numeric>

namespace dprune {

MinibatchStream::MinibatchStream(std::uint64_t seed, Index num_examples, Index batch_size,
                                 Sampling sampling, std::uint64_t position)
    : seed_(seed), n_(num_examples), batch_size_(batch_size), sampling_(sampling), position_(position) {
  if (n_ < 1) throw DomainError("minibatch stream: dataset size must be >= 1");
  if (batch_size_ < 1) throw DomainError("minibatch stream: batch size must be >= 1");
}

std::uint64_t MinibatchStream::steps_per_epoch() const {
  const auto n = static_cast<std::uint64_t>(n_);
  const auto b = static_cast<std::uint64_t>(batch_size_);
  return (n + b - 1) / b;
}

std::vector<Index> MinibatchStream::permutation(std::uint64_t epoch) const {
  std::vector<Index> perm(static_cast<std::size_t>(n_));
  std::iota(perm.begin(), perm.end(), Index{0});
  const std::uint64_t key = hash_combine(hash_combine(seed_, 0x5348554646ULL), epoch);
  for (std::size_t i = perm.size(); i > 1; --i) {
    const auto j = uniform_below(hash_combine(key, i), i);
    std::swap(perm[i - 1], perm[j]);
  }
  return perm;
}

std::vector<Index> MinibatchStream::batch_at(std::uint64_t position) const {
  std::vector<Index> batch;
  batch.reserve(static_cast<std::size_t>(batch_size_));
  if (sampling_ == Sampling::with_replacement) {
    const std::uint64_t key = hash_combine(seed_, position);
    for (Index k = 0; k < batch_size_; ++k) {
      batch.push_back(static_cast<Index>(
          uniform_below(hash_combine(key, static_cast<std::uint64_t>(k)), static_cast<std::uint64_t>(n_))));
    }
    return batch;
  }
  // Epoch shuffling: the last batch of an epoch may be short.
  const std::uint64_t spe = steps_per_epoch();
  const auto perm = permutation(position / spe);
  const auto start = static_cast<std::size_t>((position % spe) * static_cast<std::uint64_t>(batch_size_));
  const auto stop = std::min(perm.size(), start + static_cast<std::size_t>(batch_size_));
  batch.assign(perm.begin() + static_cast<std::ptrdiff_t>(start), perm.begin() + static_cast<std::ptrdiff_t>(stop));
  return batch;
}

std::vector<Index> MinibatchStream::next_batch() { return batch_at(position_++); }

void StreamDigest::absorb(const std::vector<Index>& batch) {
  for (Index i : batch) {
    h_ ^= static_cast<std::uint64_t>(i);
    h_ *= 0x100000001b3ULL;
  }
  h_ = hash_combine(h_, count_++);
}

}  // namespace dprune
