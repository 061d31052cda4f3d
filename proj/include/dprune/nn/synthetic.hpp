#pragma once

#include <dprune/nn/network.hpp>

#include <cstdint>

namespace dprune {

enum class SyntheticKind { rank_deficient_regression, blobs };

SyntheticKind parse_synthetic_kind(std::string_view s);
std::string_view to_string(SyntheticKind k);

struct SyntheticSpec {
  SyntheticKind kind = SyntheticKind::rank_deficient_regression;
  std::uint64_t seed = 0;
  Index num_examples = 100;
  Index dim = 2;       // input dimension
  Index rank = 1;      // regression: dimension of the input subspace
  Index classes = 2;   // blobs
  double noise = 0.0;  // regression target noise std
  double spread = 3.0; // blobs: std of the class centres

  bool operator==(const SyntheticSpec&) const = default;
};

/// Dataset plus the geometry it was built from. For the regression kind,
/// inputs lie in span(range_basis), so a bias-free linear model has a
/// Hessian (2/N) X^T X whose null space is exactly span(null_basis).
struct SyntheticData {
  Dataset data;
  Mat range_basis;  // dim x rank, orthonormal
  Mat null_basis;   // dim x (dim - rank), orthonormal
  ParamVector w_star;
};

/// `split` selects an independent sample (0 = train, 1 = test, ...) from the
/// same population: bases, teacher weights and centres depend on `seed` only.
SyntheticData make_synthetic(const SyntheticSpec& spec, std::uint64_t split = 0);

}  // namespace dprune
