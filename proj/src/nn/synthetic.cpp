#include <dprune/error.hpp>
#include <dprune/nn/random.hpp>
#include <dprune/nn/synthetic.hpp>

namespace dprune {

SyntheticKind parse_synthetic_kind(std::string_view s) {
  if (s == "rank_deficient_regression") return SyntheticKind::rank_deficient_regression;
  if (s == "blobs") return SyntheticKind::blobs;
  throw DomainError("unknown synthetic dataset kind '" + std::string(s) + "'");
}

std::string_view to_string(SyntheticKind k) {
  return k == SyntheticKind::blobs ? "blobs" : "rank_deficient_regression";
}

namespace {

Mat gaussian(Rng& rng, Index rows, Index cols) {
  Mat m(rows, cols);
  for (Index j = 0; j < cols; ++j)
    for (Index i = 0; i < rows; ++i) m(i, j) = rng.normal();
  return m;
}

SyntheticData regression(const SyntheticSpec& spec, std::uint64_t split) {
  if (spec.dim < 1) throw DomainError("synthetic: dim must be >= 1");
  if (spec.rank < 1 || spec.rank > spec.dim) throw DomainError("synthetic: rank must lie in [1, dim]");
  Rng geometry(hash_combine(spec.seed, 0x47454f4dULL));
  const Mat seed_cols = gaussian(geometry, spec.dim, spec.rank);
  Eigen::HouseholderQR<Mat> qr(seed_cols);
  const Mat q = qr.householderQ() * Mat::Identity(spec.dim, spec.dim);

  SyntheticData out;
  out.range_basis = q.leftCols(spec.rank);
  out.null_basis = q.rightCols(spec.dim - spec.rank);
  out.w_star = gaussian(geometry, spec.dim, 1);

  Rng sample(hash_combine(spec.seed, 0x53414d50ULL + split));
  const Mat z = gaussian(sample, spec.num_examples, spec.rank);
  out.data.inputs = z * out.range_basis.transpose();
  out.data.targets = out.data.inputs * out.w_star;
  if (spec.noise > 0.0) {
    for (Index i = 0; i < spec.num_examples; ++i) out.data.targets(i, 0) += spec.noise * sample.normal();
  }
  return out;
}

SyntheticData blobs(const SyntheticSpec& spec, std::uint64_t split) {
  if (spec.classes < 2) throw DomainError("synthetic: blobs need >= 2 classes");
  if (spec.dim < 1) throw DomainError("synthetic: dim must be >= 1");
  Rng geometry(hash_combine(spec.seed, 0x47454f4dULL));
  const Mat centres = spec.spread * gaussian(geometry, spec.classes, spec.dim);

  SyntheticData out;
  Rng sample(hash_combine(spec.seed, 0x53414d50ULL + split));
  out.data.inputs.resize(spec.num_examples, spec.dim);
  out.data.labels.resize(static_cast<std::size_t>(spec.num_examples));
  for (Index i = 0; i < spec.num_examples; ++i) {
    const auto c = static_cast<Index>(sample.below(static_cast<std::uint64_t>(spec.classes)));
    out.data.labels[static_cast<std::size_t>(i)] = static_cast<int>(c);
    for (Index j = 0; j < spec.dim; ++j) out.data.inputs(i, j) = centres(c, j) + sample.normal();
  }
  return out;
}

}  // namespace

SyntheticData make_synthetic(const SyntheticSpec& spec, std::uint64_t split) {
  if (spec.num_examples < 1) throw DomainError("synthetic: N must be >= 1");
  return spec.kind == SyntheticKind::blobs ? blobs(spec, split) : regression(spec, split);
}

}  // namespace dprune
