#include <dprune/connectivity/curve.hpp>
#include <dprune/nn/random.hpp>

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>

namespace dprune {

ParamVector curve_control_gradient(const Objective& obj, const BezierCurve<double>& curve, double t,
                                   BatchIndices batch) {
  const ParamVector theta = bezier_point(curve, t);
  return 2.0 * t * (1.0 - t) * obj.gradient(theta, batch);
}

BezierCurve<double> train_curve(const Objective& obj, BezierCurve<double> curve, const CurveTrainOptions& opts) {
  require_same_dim(curve.control.size(), obj.dim(), "train_curve");
  if (opts.epochs < 0) throw DomainError("train_curve: epochs must be >= 0");
  if (!(opts.learning_rate > 0.0)) throw DomainError("train_curve: learning rate must be positive");
  if (!(opts.momentum >= 0.0 && opts.momentum < 1.0)) throw DomainError("train_curve: momentum must lie in [0, 1)");
  MinibatchStream stream(opts.seed, obj.num_examples(), opts.batch_size, opts.sampling);
  const std::uint64_t total = stream.steps_per_epoch() * static_cast<std::uint64_t>(opts.epochs);
  const std::uint64_t t_key = hash_combine(opts.seed, 0x4355525645ULL);
  ParamVector velocity = ParamVector::Zero(curve.control.size());
  for (std::uint64_t step = 0; step < total; ++step) {
    const auto batch = stream.next_batch();
    const double t = (static_cast<double>(hash_combine(t_key, step) >> 11) + 0.5) * 0x1.0p-53;
    const ParamVector g = curve_control_gradient(obj, curve, t, batch);
    velocity = opts.momentum * velocity + g;
    curve.control -= opts.learning_rate * velocity;
    if (!curve.control.allFinite()) throw NumericError("train_curve: control point diverged");
  }
  return curve;
}

PathEvaluation eval_path(const BezierCurve<double>& curve, const PointMetric& train_loss,
                         const PointMetric& test_error, Index num_points) {
  if (num_points < 2) throw DomainError("eval_path: need at least two points");
  PathEvaluation out;
  for (Index i = 0; i < num_points; ++i) {
    const double t = i + 1 == num_points ? 1.0 : static_cast<double>(i) / static_cast<double>(num_points - 1);
    const ParamVector theta = bezier_point(curve, t);
    out.t.push_back(t);
    out.train_loss.push_back(train_loss(theta));
    if (test_error) out.test_error.push_back(test_error(theta));
  }
  return out;
}

PathEvaluation eval_path(const BezierCurve<double>& curve, const NetworkSpec& spec, const Dataset& train,
                         const Dataset* test, Index num_points) {
  PointMetric train_fn = [&](const ParamVector& w) { return forward(spec, w, train); };
  PointMetric test_fn;
  if (test) {
    test_fn = [&](const ParamVector& w) {
      return test->is_classification() ? 1.0 - accuracy(spec, w, *test) : forward(spec, w, *test);
    };
  }
  return eval_path(curve, train_fn, test_fn, num_points);
}

std::pair<double, double> PlaneGrid::coords(const ParamVector& w) const {
  const ParamVector r = w - origin;
  return {axis_x.dot(r), axis_y.dot(r)};
}

PlaneGrid plane_grid(const ParamVector& w1, const ParamVector& w2, const ParamVector& w3, Index resolution,
                     const PointMetric& loss, std::optional<PlaneWindow> window, double extent,
                     const BezierCurve<double>* curve, Index curve_points) {
  require_same_dim(w1.size(), w2.size(), "plane_grid");
  require_same_dim(w1.size(), w3.size(), "plane_grid");
  if (resolution < 2) throw DomainError("plane_grid: resolution must be >= 2");
  const ParamVector a = w2 - w1;
  const ParamVector b = w3 - w1;
  const double gram = a.squaredNorm() * b.squaredNorm() - a.dot(b) * a.dot(b);
  if (!(gram > 1e-12)) throw DomainError("plane_grid: anchors are collinear");

  PlaneGrid g;
  g.origin = w1;
  g.axis_x = a.normalized();
  ParamVector ortho = b - g.axis_x.dot(b) * g.axis_x;
  ortho -= g.axis_x.dot(ortho) * g.axis_x;
  g.axis_y = ortho.normalized();

  g.anchor_coords.resize(3, 2);
  const ParamVector* anchors[3] = {&w1, &w2, &w3};
  for (int i = 0; i < 3; ++i) {
    const auto [x, y] = g.coords(*anchors[i]);
    g.anchor_coords(i, 0) = x;
    g.anchor_coords(i, 1) = y;
  }
  // w1 is the origin, so its loss is evaluated at exactly w1.
  g.anchor_coords(0, 0) = 0.0;
  g.anchor_coords(0, 1) = 0.0;
  for (int i = 0; i < 3; ++i) g.anchor_losses.push_back(loss(*anchors[i]));

  PlaneWindow win{};
  if (window) {
    win = *window;
  } else {
    const double cx = 0.5 * (g.anchor_coords.col(0).maxCoeff() + g.anchor_coords.col(0).minCoeff());
    const double cy = 0.5 * (g.anchor_coords.col(1).maxCoeff() + g.anchor_coords.col(1).minCoeff());
    const double hx = 0.5 * extent * (g.anchor_coords.col(0).maxCoeff() - g.anchor_coords.col(0).minCoeff());
    const double hy = 0.5 * extent * (g.anchor_coords.col(1).maxCoeff() - g.anchor_coords.col(1).minCoeff());
    win = {cx - hx, cx + hx, cy - hy, cy + hy};
  }
  if (window) {
    for (Index i = 0; i < resolution; ++i) {
      const double f = static_cast<double>(i) / static_cast<double>(resolution - 1);
      g.xs.push_back(win.x_min + f * (win.x_max - win.x_min));
      g.ys.push_back(win.y_min + f * (win.y_max - win.y_min));
    }
  } else {
    // Shift each axis by under half a cell so that coordinate 0 (w1) is a node.
    const auto snapped = [resolution](double lo, double hi, std::vector<double>& out) {
      const double h = (hi - lo) / static_cast<double>(resolution - 1);
      const double k = std::round(-lo / h);
      for (Index i = 0; i < resolution; ++i) out.push_back((static_cast<double>(i) - k) * h);
    };
    snapped(win.x_min, win.x_max, g.xs);
    snapped(win.y_min, win.y_max, g.ys);
  }
  g.loss.resize(resolution, resolution);
  for (Index iy = 0; iy < resolution; ++iy) {
    for (Index ix = 0; ix < resolution; ++ix) {
      g.loss(iy, ix) = loss(g.point(g.xs[static_cast<std::size_t>(ix)], g.ys[static_cast<std::size_t>(iy)]));
    }
  }
  if (curve) {
    g.curve_coords.resize(curve_points, 2);
    for (Index i = 0; i < curve_points; ++i) {
      const double t = static_cast<double>(i) / static_cast<double>(curve_points - 1);
      const auto [x, y] = g.coords(bezier_point(*curve, std::min(t, 1.0)));
      g.curve_coords(i, 0) = x;
      g.curve_coords(i, 1) = y;
    }
  }
  return g;
}

void write_plane_grid(const PlaneGrid& g, const std::string& csv_path, const std::string& json_path) {
  std::ofstream os(csv_path);
  if (!os) throw std::runtime_error("cannot open '" + csv_path + "' for writing");
  os << "x,y,loss\n" << std::setprecision(17);
  for (std::size_t iy = 0; iy < g.ys.size(); ++iy) {
    for (std::size_t ix = 0; ix < g.xs.size(); ++ix) {
      os << g.xs[ix] << ',' << g.ys[iy] << ',' << g.loss(static_cast<Index>(iy), static_cast<Index>(ix)) << '\n';
    }
  }
  nlohmann::ordered_json j;
  j["axis_x"] = std::vector<double>(g.axis_x.data(), g.axis_x.data() + g.axis_x.size());
  j["axis_y"] = std::vector<double>(g.axis_y.data(), g.axis_y.data() + g.axis_y.size());
  j["origin"] = std::vector<double>(g.origin.data(), g.origin.data() + g.origin.size());
  auto anchors = nlohmann::ordered_json::array();
  const char* names[3] = {"w1", "w2", "w3"};
  for (int i = 0; i < 3; ++i) {
    anchors.push_back({{"name", names[i]},
                       {"x", g.anchor_coords(i, 0)},
                       {"y", g.anchor_coords(i, 1)},
                       {"loss", g.anchor_losses[static_cast<std::size_t>(i)]}});
  }
  j["anchors"] = anchors;
  auto curve = nlohmann::ordered_json::array();
  for (Index i = 0; i < g.curve_coords.rows(); ++i) curve.push_back({g.curve_coords(i, 0), g.curve_coords(i, 1)});
  j["curve"] = curve;
  std::ofstream js(json_path);
  if (!js) throw std::runtime_error("cannot open '" + json_path + "' for writing");
  js << j.dump(2) << '\n';
}

void write_path_csv(const PathEvaluation& p, const std::string& path) {
  std::ofstream os(path);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  os << "t,train_loss,test_error\n" << std::setprecision(17);
  for (std::size_t i = 0; i < p.t.size(); ++i) {
    os << p.t[i] << ',' << p.train_loss[i] << ',';
    if (i < p.test_error.size()) os << p.test_error[i];
    os << '\n';
  }
}

}  // namespace dprune
