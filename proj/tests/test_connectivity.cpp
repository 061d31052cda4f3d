#include <dprune/connectivity/curve.hpp>
#include <dprune/nn/random.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>

using namespace dprune;

namespace {

Vector<double> v1(double a) {
  Vector<double> v(1);
  v << a;
  return v;
}

Vector<double> v2(double a, double b) {
  Vector<double> v(2);
  v << a, b;
  return v;
}

// Two-weight identity chain x -> w2 * w1 * x fitted to y = x: zero loss on
// the hyperbola w1 w2 = 1, a curved valley.
NetworkObjective valley() {
  Dataset d;
  d.inputs.resize(8, 1);
  for (Index i = 0; i < 8; ++i) d.inputs(i, 0) = -1.0 + 2.0 * static_cast<double>(i) / 7.0;
  d.targets = d.inputs;
  return NetworkObjective({{1, 1, 1}, Activation::identity, LossKind::squared_error, false}, d);
}

double max_of(const std::vector<double>& xs) { return *std::max_element(xs.begin(), xs.end()); }

}  // namespace

TEST(Bezier, Examples) {
  const BezierCurve<double> c{v1(0), v1(2), v1(3)};
  EXPECT_EQ(bezier_point(c, 0.0), c.w1);
  EXPECT_EQ(bezier_point(c, 1.0), c.w2);
  EXPECT_DOUBLE_EQ(bezier_point(c, 0.5)(0), 2.0);
  const auto mid = BezierCurve<double>::through_midpoint(v2(1, 3), v2(3, 5));
  EXPECT_EQ(bezier_point(mid, 0.5), v2(2, 4));
  EXPECT_THROW(bezier_point(c, 1.5), DomainError);
  EXPECT_THROW(bezier_point(c, -0.1), DomainError);
}

TEST(Bezier, AffineInAnchors) {
  const BezierCurve<double> c{v2(1, -2), v2(0.5, 3), v2(-1, 1)};
  const BezierCurve<double> scaled{3.0 * c.w1, 3.0 * c.w2, 3.0 * c.control};
  for (double t : {0.1, 0.37, 0.8}) EXPECT_LE((bezier_point(scaled, t) - 3.0 * bezier_point(c, t)).norm(), 1e-14);
}

TEST(CurveGradient, MatchesFiniteDifferences) {
  const NetworkObjective obj = valley();
  const BezierCurve<double> c{v2(2, 0.5), v2(0.5, 2), v2(0.9, 1.3)};
  const std::vector<Index> batch{0, 3, 5};
  for (double t : {0.2, 0.5, 0.9}) {
    const ParamVector g = curve_control_gradient(obj, c, t, batch);
    for (Index j = 0; j < 2; ++j) {
      BezierCurve<double> up = c, down = c;
      up.control(j) += 1e-6;
      down.control(j) -= 1e-6;
      const double fd = (obj.loss(bezier_point(up, t), batch) - obj.loss(bezier_point(down, t), batch)) / 2e-6;
      EXPECT_LE(std::abs(fd - g(j)) / std::max(1.0, std::abs(g(j))), 1e-5);
    }
  }
}

TEST(TrainCurve, ZeroEpochsLeavesControl) {
  const NetworkObjective obj = valley();
  const auto c = BezierCurve<double>::through_midpoint(v2(2, 0.5), v2(0.5, 2));
  CurveTrainOptions o;
  o.epochs = 0;
  EXPECT_EQ(train_curve(obj, c, o).control, c.control);
}

TEST(TrainCurve, BendsIntoTheValley) {
  const NetworkObjective obj = valley();
  const auto chord = BezierCurve<double>::through_midpoint(v2(2, 0.5), v2(0.5, 2));
  CurveTrainOptions o;
  o.epochs = 200;
  o.batch_size = 4;
  o.learning_rate = 0.05;
  o.seed = 3;
  const auto trained = train_curve(obj, chord, o);
  EXPECT_EQ(trained.w1, chord.w1);
  EXPECT_EQ(trained.w2, chord.w2);
  const PointMetric loss = [&](const ParamVector& w) { return obj.loss(w); };
  const PathEvaluation before = eval_path(chord, loss, {}, 41);
  const PathEvaluation after = eval_path(trained, loss, {}, 41);
  EXPECT_LT(max_of(after.train_loss), max_of(before.train_loss));
  EXPECT_EQ(after.train_loss.front(), obj.loss(chord.w1));
  EXPECT_EQ(after.train_loss.back(), obj.loss(chord.w2));
}

TEST(TrainCurve, MomentumOptionRuns) {
  const NetworkObjective obj = valley();
  const auto chord = BezierCurve<double>::through_midpoint(v2(2, 0.5), v2(0.5, 2));
  CurveTrainOptions o;
  o.epochs = 50;
  o.learning_rate = 0.02;
  o.momentum = 0.9;
  const auto trained = train_curve(obj, chord, o);
  EXPECT_TRUE(trained.control.allFinite());
  o.momentum = 1.0;
  EXPECT_THROW(train_curve(obj, chord, o), DomainError);
}

TEST(EvalPath, EndpointsAndConstantPath) {
  const NetworkObjective obj = valley();
  const PointMetric loss = [&](const ParamVector& w) { return obj.loss(w); };
  const BezierCurve<double> c{v2(2, 0.5), v2(0.5, 2), v2(1, 1)};
  const PathEvaluation two = eval_path(c, loss, {}, 2);
  ASSERT_EQ(two.t.size(), 2u);
  EXPECT_EQ(two.t.front(), 0.0);
  EXPECT_EQ(two.t.back(), 1.0);
  EXPECT_EQ(two.train_loss[0], obj.loss(c.w1));
  EXPECT_EQ(two.train_loss[1], obj.loss(c.w2));
  const BezierCurve<double> flat{v2(1, 2), v2(1, 2), v2(1, 2)};
  const PathEvaluation p = eval_path(flat, loss, {}, 9);
  for (double x : p.train_loss) EXPECT_NEAR(x, p.train_loss[0], 1e-15);
  EXPECT_THROW(eval_path(c, loss, {}, 1), DomainError);
}

TEST(EvalPath, NetworkOverloadReportsTestError) {
  const NetworkObjective obj = valley();
  const BezierCurve<double> c{v2(2, 0.5), v2(0.5, 2), v2(1, 1)};
  const PathEvaluation p = eval_path(c, obj.spec(), obj.data(), &obj.data(), 5);
  ASSERT_EQ(p.test_error.size(), 5u);
  for (std::size_t i = 0; i < 5; ++i) EXPECT_DOUBLE_EQ(p.test_error[i], p.train_loss[i]);
}

TEST(PlaneGrid, AnchorsAxesAndGridNode) {
  const NetworkObjective obj = valley();
  const PointMetric loss = [&](const ParamVector& w) { return obj.loss(w); };
  Vector<double> w1(2), w2(2), w3(2);
  w1 << 2, 0.5;
  w2 << 0.5, 2;
  w3 << 1.1, 0.95;
  const BezierCurve<double> c{w1, w2, w3};
  const PlaneGrid g = plane_grid(w1, w2, w3, 21, loss, std::nullopt, 1.2, &c, 11);
  EXPECT_NEAR(g.axis_x.norm(), 1.0, 1e-12);
  EXPECT_NEAR(g.axis_y.norm(), 1.0, 1e-12);
  EXPECT_NEAR(g.axis_x.dot(g.axis_y), 0.0, 1e-12);
  EXPECT_EQ(g.anchor_losses[0], obj.loss(w1));
  const auto ix = std::find(g.xs.begin(), g.xs.end(), 0.0);
  const auto iy = std::find(g.ys.begin(), g.ys.end(), 0.0);
  ASSERT_NE(ix, g.xs.end());
  ASSERT_NE(iy, g.ys.end());
  EXPECT_EQ(g.loss(iy - g.ys.begin(), ix - g.xs.begin()), obj.loss(w1));
  for (int i = 0; i < 3; ++i) {
    const ParamVector a = i == 0 ? w1 : (i == 1 ? w2 : w3);
    EXPECT_LE((g.point(g.anchor_coords(i, 0), g.anchor_coords(i, 1)) - a).norm(), 1e-12);
  }
  EXPECT_EQ(g.curve_coords.rows(), 11);
  const double span = g.xs.back() - g.xs.front();
  const double bbox = g.anchor_coords.col(0).maxCoeff() - g.anchor_coords.col(0).minCoeff();
  EXPECT_NEAR(span, 1.2 * bbox, 1e-12);
}

TEST(PlaneGrid, CollinearAnchorsRejected) {
  const PointMetric loss = [](const ParamVector& w) { return w.squaredNorm(); };
  EXPECT_THROW(plane_grid(v2(0, 0), v2(1, 1), v2(2, 2), 5, loss), DomainError);
}

TEST(PlaneGrid, SymmetricAboutMinimiser) {
  // Isotropic bowl centred at m, anchors placed so m projects to (1, 1).
  Vector<double> m(3);
  m << 1.0, 1.0, 0.0;
  const PointMetric loss = [&](const ParamVector& w) { return (w - m).squaredNorm(); };
  Vector<double> w1 = Vector<double>::Zero(3), w2(3), w3(3);
  w2 << 3, 0, 0;
  w3 << 0, 3, 0;
  const PlaneGrid g = plane_grid(w1, w2, w3, 21, loss, PlaneWindow{-1.0, 3.0, -1.0, 3.0});
  for (Index iy = 0; iy < 21; ++iy) {
    for (Index ix = 0; ix < 21; ++ix) {
      EXPECT_NEAR(g.loss(iy, ix), g.loss(20 - iy, 20 - ix), 1e-12);
      EXPECT_NEAR(g.loss(iy, ix), g.loss(ix, iy), 1e-12);
    }
  }
}

TEST(PlaneGrid, WritesCsvAndJson) {
  const auto dir = std::filesystem::temp_directory_path() / "dprune_plane";
  std::filesystem::create_directories(dir);
  const PointMetric loss = [](const ParamVector& w) { return w.squaredNorm(); };
  const PlaneGrid g = plane_grid(v2(0, 0), v2(1, 0), v2(0, 1), 4, loss);
  write_plane_grid(g, (dir / "plane.csv").string(), (dir / "plane.json").string());
  EXPECT_GT(std::filesystem::file_size(dir / "plane.csv"), 0u);
  EXPECT_GT(std::filesystem::file_size(dir / "plane.json"), 0u);
}
