#pragma once

#include <dprune/error.hpp>
#include <dprune/nn/minibatch.hpp>
#include <dprune/nn/network.hpp>

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace dprune {

/// Quadratic Bezier curve theta(t) = (1-t)^2 w1 + t^2 w2 + 2t(1-t) control
/// with fixed endpoints.
template <typename Scalar>
struct BezierCurve {
  Vector<Scalar> w1;
  Vector<Scalar> w2;
  Vector<Scalar> control;

  /// Control initialised at the chord midpoint.
  static BezierCurve through_midpoint(const Vector<Scalar>& a, const Vector<Scalar>& b) {
    require_same_dim(a.size(), b.size(), "bezier endpoints");
    return {a, b, (a + b) / Scalar(2)};
  }
};

template <typename Scalar>
Vector<Scalar> bezier_point(const BezierCurve<Scalar>& c, Scalar t) {
  if (!(t >= Scalar(0) && t <= Scalar(1))) throw DomainError("bezier_point: t must lie in [0, 1]");
  require_same_dim(c.w1.size(), c.w2.size(), "bezier_point");
  require_same_dim(c.w1.size(), c.control.size(), "bezier_point");
  if (t == Scalar(0)) return c.w1;
  if (t == Scalar(1)) return c.w2;
  const Scalar s = Scalar(1) - t;
  return s * s * c.w1 + t * t * c.w2 + Scalar(2) * t * s * c.control;
}

/// d/dcontrol l(theta(t)) on a batch: 2t(1-t) grad l(theta(t)).
ParamVector curve_control_gradient(const Objective& obj, const BezierCurve<double>& curve, double t,
                                   BatchIndices batch);

struct CurveTrainOptions {
  Index epochs = 1;
  Index batch_size = 1;
  double learning_rate = 0.1;
  double momentum = 0.0;
  std::uint64_t seed = 0;
  Sampling sampling = Sampling::with_replacement;
};

/// SGD on the control point with t ~ Uniform(0, 1) drawn afresh at every
/// step. Endpoints are never modified.
BezierCurve<double> train_curve(const Objective& obj, BezierCurve<double> curve, const CurveTrainOptions& opts);

using PointMetric = std::function<double(const ParamVector&)>;

struct PathEvaluation {
  std::vector<double> t;
  std::vector<double> train_loss;
  std::vector<double> test_error;  // empty when no test metric was given
};

/// Metrics on the uniform grid t_i = i / (num_points - 1).
PathEvaluation eval_path(const BezierCurve<double>& curve, const PointMetric& train_loss,
                         const PointMetric& test_error, Index num_points);

/// Network convenience: training loss on `train`; test error is
/// 1 - accuracy for labelled data and the mean loss otherwise.
PathEvaluation eval_path(const BezierCurve<double>& curve, const NetworkSpec& spec, const Dataset& train,
                         const Dataset* test, Index num_points);

struct PlaneWindow {
  double x_min, x_max, y_min, y_max;
};

/// Loss on a regular grid over the plane through three anchors. Axes are
/// Gram-Schmidt orthonormalised from (w2 - w1, w3 - w1); plane coordinates
/// are measured from w1.
struct PlaneGrid {
  ParamVector origin;
  ParamVector axis_x;
  ParamVector axis_y;
  std::vector<double> xs;
  std::vector<double> ys;
  Mat loss;                             // ys.size() x xs.size()
  Mat anchor_coords;                    // 3 x 2
  std::vector<double> anchor_losses;
  Mat curve_coords;                     // m x 2, empty unless a curve was given

  ParamVector point(double x, double y) const { return origin + x * axis_x + y * axis_y; }
  std::pair<double, double> coords(const ParamVector& w) const;
};

/// Throws DomainError when the anchors are (numerically) collinear, i.e. the
/// Gram determinant of (w2 - w1, w3 - w1) is <= 1e-12. Without an explicit
/// window the grid spans `extent` times the bounding box of the anchor
/// projections, shifted by less than one cell so that w1 is a grid node.
PlaneGrid plane_grid(const ParamVector& w1, const ParamVector& w2, const ParamVector& w3, Index resolution,
                     const PointMetric& loss, std::optional<PlaneWindow> window = std::nullopt,
                     double extent = 1.2, const BezierCurve<double>* curve = nullptr, Index curve_points = 61);

/// x,y,loss rows plus a JSON sidecar with axes and anchor projections.
void write_plane_grid(const PlaneGrid& g, const std::string& csv_path, const std::string& json_path);
void write_path_csv(const PathEvaluation& p, const std::string& path);

}  // namespace dprune
