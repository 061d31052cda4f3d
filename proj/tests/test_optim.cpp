#include <dprune/nn/network.hpp>
#include <dprune/nn/random.hpp>
#include <dprune/optim/grda.hpp>
#include <dprune/optim/schedule.hpp>
#include <dprune/optim/soft_threshold.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace dprune;

TEST(SoftThreshold, Examples) {
  EXPECT_DOUBLE_EQ(soft_threshold(-1.0, 0.3), -0.7);
  EXPECT_EQ(soft_threshold(1.5, 2.0), 0.0);
  for (double x : {-3.25, -1e-300, 0.0, 7.5}) EXPECT_EQ(soft_threshold(x, 0.0), x);
}

TEST(SoftThreshold, ContractionAndSign) {
  Rng rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double a = rng.normal(0, 2), b = rng.normal(0, 2), g = rng.uniform(0, 2);
    EXPECT_LE(std::abs(soft_threshold(a, g) - soft_threshold(b, g)), std::abs(a - b) + 1e-15);
    const double r = soft_threshold(a, g);
    EXPECT_DOUBLE_EQ(std::abs(r), std::max(0.0, std::abs(a) - g));
    EXPECT_GE(r * a, 0.0);
  }
}

TEST(SoftThreshold, VectorForm) {
  Vector<double> v(3);
  v << -1.0, 0.2, 3.0;
  const Vector<double> r = soft_threshold(v, 0.5);
  EXPECT_DOUBLE_EQ(r(0), -0.5);
  EXPECT_EQ(r(1), 0.0);
  EXPECT_DOUBLE_EQ(r(2), 2.5);
}

TEST(TuningG, Examples) {
  const TuningFn tf{0.005, 0.55};
  EXPECT_EQ(tuning_g<double>(0, 0.1, tf), 0.0);
  EXPECT_NEAR(tuning_g<double>(100, 0.1, tf), 5.610e-3, 5e-7);
  EXPECT_NEAR(tuning_g<double>(100, 0.1, tf), 0.005 * std::sqrt(0.1) * std::pow(10.0, 0.55), 1e-17);
  const TuningFn zero{0.0, 0.55};
  for (std::uint64_t n : {1u, 10u, 100000u}) EXPECT_EQ(tuning_g<double>(n, 0.1, zero), 0.0);
}

TEST(TuningFn, Validation) {
  EXPECT_THROW((TuningFn{-1.0, 0.6}.validate()), DomainError);
  EXPECT_THROW((TuningFn{1.0, 1.0}.validate()), DomainError);
  EXPECT_THROW((TuningFn{1.0, 0.0}.validate()), DomainError);
  EXPECT_TRUE((TuningFn{1.0, 0.6}.validate().empty()));
  EXPECT_EQ((TuningFn{1.0, 0.4}.validate().size()), 1u);
}

TEST(SgdStep, Examples) {
  Vector<double> w(1), g(1);
  w << 1.0;
  g << 2.0;
  EXPECT_DOUBLE_EQ(sgd_step(w, g, 0.1)(0), 0.8);
  EXPECT_EQ(sgd_step(w, Vector<double>::Zero(1), 0.1), w);
  EXPECT_THROW(sgd_step(w, Vector<double>::Zero(2), 0.1), DimensionError);
}

TEST(SgdStep, QuadraticLossDecreasesMonotonically) {
  Mat h(2, 2);
  h << 4.0, 1.0, 1.0, 2.0;
  const QuadraticObjective q(h, Vector<double>::Ones(2));
  Vector<double> w(2);
  w << -3.0, 5.0;
  double prev = q.loss(w);
  for (int i = 0; i < 100; ++i) {
    w = sgd_step(w, q.gradient(w), 0.3);  // below 2 / lambda_max
    const double cur = q.loss(w);
    EXPECT_LE(cur, prev);
    prev = cur;
  }
}

TEST(GrdaStep, HandExample) {
  Vector<double> w0(1), g(1);
  w0 << 1.0;
  g << 2.0;
  auto st = GrdaState<double>::init(w0);
  grda_step(st, g, 0.1, TuningFn{0.1, 0.6});
  EXPECT_DOUBLE_EQ(st.v(0), 0.8);
  EXPECT_NEAR(st.g_tilde, 7.9433e-3, 1e-7);
  EXPECT_NEAR(st.w(0), 0.7920567, 1e-7);
  EXPECT_EQ(st.n, 1u);
}

TEST(GrdaStep, ZeroThresholdScaleIsSgdBitwise) {
  Rng rng(5);
  Vector<double> w = Vector<double>::Zero(6);
  for (Index j = 0; j < 6; ++j) w(j) = rng.normal();
  auto st = GrdaState<double>::init(w);
  for (int i = 0; i < 1000; ++i) {
    Vector<double> g(6);
    for (Index j = 0; j < 6; ++j) g(j) = rng.normal();
    w = sgd_step(w, g, 0.01);
    grda_step(st, g, 0.01, TuningFn{0.0, 0.6});
    ASSERT_TRUE((w.array() == st.w.array()).all()) << "step " << i;
  }
}

TEST(GrdaStep, StaticDualIsEventuallyZeroedForGood) {
  Vector<double> w0(1);
  w0 << 0.01;
  auto st = GrdaState<double>::init(w0);
  bool zeroed = false;
  for (int i = 0; i < 2000; ++i) {
    grda_step(st, Vector<double>::Zero(1), 0.1, TuningFn{0.05, 0.6});
    if (zeroed) ASSERT_EQ(st.w(0), 0.0);
    zeroed = zeroed || st.w(0) == 0.0;
  }
  EXPECT_TRUE(zeroed);
}

TEST(GrdaStep, ShrinkageAndMonotoneThreshold) {
  Rng rng(8);
  Vector<double> w0(5);
  for (Index j = 0; j < 5; ++j) w0(j) = rng.normal();
  auto st = GrdaState<double>::init(w0);
  double prev = 0.0;
  for (int i = 0; i < 500; ++i) {
    Vector<double> g(5);
    for (Index j = 0; j < 5; ++j) g(j) = rng.normal();
    grda_step(st, g, 0.05, TuningFn{0.2, 0.7});
    EXPECT_GT(st.g_tilde, prev);
    prev = st.g_tilde;
    EXPECT_TRUE((st.w.cwiseAbs().array() <= st.v.cwiseAbs().array()).all());
    EXPECT_TRUE(((st.w.array() * st.v.array()) >= 0.0).all());
  }
}

TEST(GrdaScheduled, ConstantRateMatchesPlainBitwise) {
  Rng rng(2);
  Vector<double> w0(4);
  for (Index j = 0; j < 4; ++j) w0(j) = rng.normal();
  auto a = GrdaState<double>::init(w0);
  auto b = GrdaState<double>::init(w0);
  const TuningFn tf{0.3, 0.55};
  for (int i = 0; i < 1000; ++i) {
    Vector<double> g(4);
    for (Index j = 0; j < 4; ++j) g(j) = rng.normal();
    grda_step(a, g, 0.02, tf);
    grda_step_scheduled(b, g, 0.02, tf);
    ASSERT_EQ(a.g_tilde, b.g_tilde);
    ASSERT_TRUE((a.w.array() == b.w.array()).all());
  }
}

TEST(GrdaScheduled, FirstStepMatchesPlain) {
  Vector<double> w0(2), g(2);
  w0 << 0.3, -0.4;
  g << 1.0, -2.0;
  auto a = GrdaState<double>::init(w0);
  auto b = GrdaState<double>::init(w0);
  grda_step(a, g, 0.07, TuningFn{0.5, 0.6});
  grda_step_scheduled(b, g, 0.07, TuningFn{0.5, 0.6});
  EXPECT_EQ(a.w, b.w);
  EXPECT_EQ(a.g_tilde, b.g_tilde);
}

TEST(GrdaScheduled, DropKeepsThresholdContinuous) {
  const TuningFn tf{0.5, 0.6};
  auto st = GrdaState<double>::init(Vector<double>::Ones(1));
  const Vector<double> g = Vector<double>::Zero(1);
  std::vector<double> trace;
  for (int i = 0; i < 200; ++i) {
    grda_step_scheduled(st, g, i < 100 ? 0.1 : 0.01, tf);
    trace.push_back(st.g_tilde);
  }
  const double before = trace[99] - trace[98];
  const double at_drop = trace[100] - trace[99];
  EXPECT_GT(at_drop, 0.0);
  EXPECT_LT(at_drop, before);  // smaller increment, no jump
  EXPECT_NEAR(at_drop, tuning_g<double>(101, 0.01, tf) - tuning_g<double>(100, 0.01, tf), 1e-15);
  for (std::size_t i = 1; i < trace.size(); ++i) EXPECT_GT(trace[i], trace[i - 1]);
}

TEST(GrdaScheduled, RejectsNonPositiveRate) {
  auto st = GrdaState<double>::init(Vector<double>::Ones(1));
  EXPECT_THROW(grda_step_scheduled(st, Vector<double>::Zero(1), 0.0, TuningFn{}), DomainError);
}

TEST(Schedule, GaripovExamples) {
  const LrSchedule s{ScheduleKind::garipov_linear, 0.1, {}};
  EXPECT_DOUBLE_EQ(lr_at(s, 0.25), 0.1);
  EXPECT_NEAR(lr_at(s, 0.7), 0.0505, 1e-15);
  EXPECT_NEAR(lr_at(s, 0.95), 0.001, 1e-15);
  EXPECT_THROW(lr_at(s, 1.5), DomainError);
}

TEST(Schedule, ConstantAndDrop) {
  const LrSchedule s{ScheduleKind::constant_and_drop, 0.1, {{0.5, 0.1}, {0.75, 0.1}}};
  EXPECT_DOUBLE_EQ(lr_at(s, 0.2), 0.1);
  EXPECT_NEAR(lr_at(s, 0.6), 0.01, 1e-17);
  EXPECT_NEAR(lr_at(s, 0.9), 0.001, 1e-17);
  EXPECT_DOUBLE_EQ(lr_at(LrSchedule{ScheduleKind::constant, 0.3, {}}, 0.99), 0.3);
  EXPECT_THROW((LrSchedule{ScheduleKind::constant, -1.0, {}}.validate()), DomainError);
}
