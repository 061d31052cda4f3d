#include <dprune/nn/dataset_io.hpp>
#include <dprune/nn/minibatch.hpp>
#include <dprune/nn/network.hpp>
#include <dprune/nn/random.hpp>
#include <dprune/nn/synthetic.hpp>
#include <dprune/spectral/eigen.hpp>
#include <dprune/spectral/hessian.hpp>
#include <dprune/spectral/zero_space.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <numeric>
#include <sstream>

using namespace dprune;

namespace {

NetworkSpec linear_net() { return NetworkSpec{{2, 1}, Activation::identity, LossKind::squared_error, false}; }

Dataset one_point(double x0, double x1, double y) {
  Dataset d;
  d.inputs.resize(1, 2);
  d.inputs << x0, x1;
  d.targets.resize(1, 1);
  d.targets << y;
  return d;
}

Dataset random_regression(std::uint64_t seed, Index n, Index in, Index out) {
  Rng rng(seed);
  Dataset d;
  d.inputs.resize(n, in);
  d.targets.resize(n, out);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < in; ++j) d.inputs(i, j) = rng.normal();
    for (Index j = 0; j < out; ++j) d.targets(i, j) = rng.normal();
  }
  return d;
}

std::vector<Index> all_rows(Index n) {
  std::vector<Index> r(static_cast<std::size_t>(n));
  std::iota(r.begin(), r.end(), Index{0});
  return r;
}

}  // namespace

TEST(Forward, LinearNetHandValue) {
  ParamVector w(2);
  w << 1.0, 2.0;
  EXPECT_DOUBLE_EQ(forward(linear_net(), w, one_point(1, 1, 2)), 1.0);
}

TEST(Forward, ZeroWeightsOnZeroTargets) {
  const NetworkSpec spec{{3, 5, 2}, Activation::tanh, LossKind::squared_error, true};
  Dataset d = random_regression(3, 7, 3, 2);
  d.targets.setZero();
  EXPECT_EQ(forward(spec, ParamVector::Zero(spec.num_params()), d), 0.0);
}

TEST(Forward, UniformSoftmaxIsLogTwo) {
  const NetworkSpec spec{{1, 2}, Activation::identity, LossKind::cross_entropy, true};
  Dataset d;
  d.inputs = Mat::Ones(1, 1);
  d.labels = {0};
  EXPECT_NEAR(forward(spec, ParamVector::Zero(spec.num_params()), d), std::log(2.0), 1e-15);
}

TEST(Forward, RejectsBadInputs) {
  ParamVector w(3);
  w.setOnes();
  EXPECT_THROW(forward(linear_net(), w, one_point(1, 1, 2)), DimensionError);
  ParamVector nan(2);
  nan << 1.0, std::nan("");
  EXPECT_THROW(forward(linear_net(), nan, one_point(1, 1, 2)), NumericError);
  const NetworkSpec bad{{2}, Activation::identity, LossKind::squared_error, false};
  EXPECT_THROW(bad.validate(), DomainError);
}

TEST(Gradient, LinearNetHandValue) {
  ParamVector w(2);
  w << 1.0, 2.0;
  const ParamVector g = gradient(linear_net(), w, one_point(1, 1, 2));
  EXPECT_DOUBLE_EQ(g(0), 2.0);
  EXPECT_DOUBLE_EQ(g(1), 2.0);
}

TEST(Gradient, QuadraticObjectiveIsExact) {
  Mat h(2, 2);
  h << 3.0, 1.0, 1.0, 2.0;
  ParamVector ws(2), w(2);
  ws << 0.5, -1.0;
  w << 2.0, 1.0;
  const QuadraticObjective q(h, ws);
  EXPECT_TRUE(q.gradient(w).isApprox(h * (w - ws), 1e-15));
  EXPECT_NEAR(q.loss(w), 0.5 * (w - ws).dot(h * (w - ws)), 1e-15);
}

TEST(Gradient, MatchesFiniteDifferencesOnRandomMlps) {
  double worst = 0.0;
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const Activation act = trial % 2 ? Activation::tanh : Activation::identity;
    const NetworkSpec spec{{2, 8, 2}, act, LossKind::squared_error, true};
    const Dataset d = random_regression(100 + trial, 5, 2, 2);
    const ParamVector w = init_params(spec, trial);
    worst = std::max(worst, grad_check(spec, w, d, all_rows(5), 1e-5));
  }
  EXPECT_LE(worst, 1e-5);
}

TEST(Gradient, CrossEntropyMatchesFiniteDifferences) {
  const NetworkSpec spec{{3, 6, 4}, Activation::tanh, LossKind::cross_entropy, true};
  Dataset d = random_regression(9, 8, 3, 1);
  d.targets.resize(0, 0);
  for (int i = 0; i < 8; ++i) d.labels.push_back(i % 4);
  EXPECT_LE(grad_check(spec, init_params(spec, 4), d, all_rows(8), 1e-5), 1e-5);
}

TEST(GradCheck, LinearNetIsTight) {
  ParamVector w(2);
  w << 1.0, 2.0;
  const std::vector<Index> b{0};
  EXPECT_LE(grad_check(linear_net(), w, one_point(1, 1, 2), b, 1e-5), 1e-8);
}

TEST(GradCheck, DeadReluStaysFinite) {
  const NetworkSpec spec{{1, 1, 1}, Activation::relu, LossKind::squared_error, true};
  ParamVector w(4);
  w << 1.0, -5.0, 2.0, 0.0;  // hidden pre-activation is negative
  Dataset d;
  d.inputs = Mat::Ones(1, 1);
  d.targets = Mat::Ones(1, 1);
  const std::vector<Index> b{0};
  const double e = grad_check(spec, w, d, b, 1e-5);
  EXPECT_TRUE(std::isfinite(e));
  EXPECT_EQ(gradient(spec, w, d)(0), 0.0);
}

TEST(Gradient, IsPure) {
  const NetworkSpec spec{{3, 4, 2}, Activation::tanh, LossKind::squared_error, true};
  const Dataset d = random_regression(1, 10, 3, 2);
  const ParamVector w = init_params(spec, 2);
  EXPECT_EQ(gradient(spec, w, d), gradient(spec, w, d));
  EXPECT_EQ(forward(spec, w, d), forward(spec, w, d));
}

TEST(Minibatch, ReplayIsIdentical) {
  MinibatchStream a(42, 50, 3), b(42, 50, 3);
  for (int i = 0; i < 10000; ++i) ASSERT_EQ(a.next_batch(), b.next_batch());
}

TEST(Minibatch, PureFunctionOfPosition) {
  MinibatchStream a(7, 20, 4);
  for (int i = 0; i < 30; ++i) a.next_batch();
  const MinibatchStream b(7, 20, 4);
  EXPECT_EQ(a.next_batch(), b.batch_at(30));
  MinibatchStream c(7, 20, 4, Sampling::with_replacement, 30);
  EXPECT_EQ(c.next_batch(), b.batch_at(30));
}

TEST(Minibatch, FullBatchDrawWithReplacement) {
  MinibatchStream s(1, 10, 10);
  const auto b = s.next_batch();
  ASSERT_EQ(b.size(), 10u);
  for (Index i : b) {
    EXPECT_GE(i, 0);
    EXPECT_LT(i, 10);
  }
}

TEST(Minibatch, EpochShuffleIsAPermutation) {
  MinibatchStream s(3, 10, 4, Sampling::epoch_shuffle);
  EXPECT_EQ(s.steps_per_epoch(), 3u);
  std::vector<int> seen(10, 0);
  for (int k = 0; k < 3; ++k) {
    for (Index i : s.next_batch()) ++seen[static_cast<std::size_t>(i)];
  }
  for (int c : seen) EXPECT_EQ(c, 1);
}

TEST(Minibatch, ChiSquareUniformity) {
  constexpr Index kN = 20;
  MinibatchStream s(2024, kN, 1);
  std::vector<double> counts(kN, 0.0);
  constexpr int kDraws = 1000000;
  for (int i = 0; i < kDraws; ++i) counts[static_cast<std::size_t>(s.next_batch()[0])] += 1.0;
  const double expected = static_cast<double>(kDraws) / kN;
  double chi2 = 0.0;
  for (double c : counts) chi2 += (c - expected) * (c - expected) / expected;
  // 19 degrees of freedom: mean 19, sd sqrt(38); 3 sd bound.
  EXPECT_LT(chi2, 19.0 + 3.0 * std::sqrt(38.0));
}

TEST(Minibatch, DigestSeparatesStreams) {
  MinibatchStream a(1, 30, 2), b(2, 30, 2);
  StreamDigest da, db, da2;
  MinibatchStream a2(1, 30, 2);
  for (int i = 0; i < 100; ++i) {
    da.absorb(a.next_batch());
    db.absorb(b.next_batch());
    da2.absorb(a2.next_batch());
  }
  EXPECT_EQ(da.value(), da2.value());
  EXPECT_NE(da.value(), db.value());
}

TEST(Synthetic, RankOneNullSpaceIsKnown) {
  const SyntheticSpec spec{SyntheticKind::rank_deficient_regression, 5, 40, 2, 1, 2, 0.0, 3.0};
  const SyntheticData sd = make_synthetic(spec);
  const NetworkObjective obj(NetworkSpec{{2, 1}, Activation::identity, LossKind::squared_error, false}, sd.data);
  const Mat h = dense_hessian(obj, ParamVector::Zero(2));
  EXPECT_LE((h * sd.null_basis).norm(), 1e-10);
  const ZeroSpace zs = zero_space(dense_eig(h));
  ASSERT_EQ(zs.rank(), 1);
  EXPECT_LE(max_principal_angle(zs.basis, sd.null_basis), 1e-10);
}

TEST(Synthetic, FullRankHasNoNullSpace) {
  const SyntheticSpec spec{SyntheticKind::rank_deficient_regression, 5, 40, 4, 4, 2, 0.0, 3.0};
  const SyntheticData sd = make_synthetic(spec);
  EXPECT_EQ(sd.null_basis.cols(), 0);
  const NetworkObjective obj(NetworkSpec{{4, 1}, Activation::identity, LossKind::squared_error, false}, sd.data);
  EXPECT_EQ(zero_space(dense_eig(dense_hessian(obj, ParamVector::Zero(4)))).rank(), 0);
}

TEST(Synthetic, BlobsReplay) {
  const SyntheticSpec spec{SyntheticKind::blobs, 11, 30, 3, 1, 2, 0.0, 3.0};
  const SyntheticData a = make_synthetic(spec), b = make_synthetic(spec);
  EXPECT_EQ(a.data.inputs, b.data.inputs);
  EXPECT_EQ(a.data.labels, b.data.labels);
  EXPECT_TRUE(a.data.is_classification());
}

TEST(Synthetic, InvalidRankRejected) {
  const SyntheticSpec spec{SyntheticKind::rank_deficient_regression, 5, 40, 2, 3, 2, 0.0, 3.0};
  EXPECT_THROW(make_synthetic(spec), DomainError);
}

TEST(DatasetIo, CsvRoundTrip) {
  const Dataset d = random_regression(8, 6, 3, 2);
  std::stringstream ss;
  write_dataset_csv(ss, d);
  const Dataset r = read_dataset_csv(ss);
  EXPECT_EQ(r.inputs, d.inputs);
  EXPECT_EQ(r.targets, d.targets);

  Dataset c = random_regression(9, 4, 2, 1);
  c.targets.resize(0, 0);
  c.labels = {0, 1, 1, 0};
  std::stringstream sc;
  write_dataset_csv(sc, c);
  const Dataset rc = read_dataset_csv(sc);
  EXPECT_EQ(rc.labels, c.labels);
  EXPECT_EQ(rc.inputs, c.inputs);
}
