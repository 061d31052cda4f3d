#include <dprune/error.hpp>
#include <dprune/nn/network.hpp>
#include <dprune/nn/random.hpp>

#include <cmath>
#include <limits>

namespace dprune {

std::string_view to_string(Activation a) {
  switch (a) {
    case Activation::relu: return "relu";
    case Activation::tanh: return "tanh";
    case Activation::identity: return "identity";
  }
  return "?";
}

std::string_view to_string(LossKind l) {
  return l == LossKind::squared_error ? "squared_error" : "cross_entropy";
}

Activation parse_activation(std::string_view s) {
  if (s == "relu") return Activation::relu;
  if (s == "tanh") return Activation::tanh;
  if (s == "identity") return Activation::identity;
  throw DomainError("unknown activation '" + std::string(s) + "'");
}

LossKind parse_loss(std::string_view s) {
  if (s == "squared_error") return LossKind::squared_error;
  if (s == "cross_entropy") return LossKind::cross_entropy;
  throw DomainError("unknown loss '" + std::string(s) + "'");
}

void NetworkSpec::validate() const {
  if (layer_widths.size() < 2) throw DomainError("network needs at least input and output layers");
  for (Index w : layer_widths) {
    if (w < 1) throw DomainError("layer widths must be >= 1");
  }
  if (loss == LossKind::cross_entropy && output_dim() < 2) {
    throw DomainError("cross_entropy requires output width >= 2");
  }
}

Index NetworkSpec::num_params() const {
  Index d = 0;
  for (std::size_t l = 1; l < layer_widths.size(); ++l) {
    d += layer_widths[l] * layer_widths[l - 1] + (use_bias ? layer_widths[l] : 0);
  }
  return d;
}

void Dataset::validate() const {
  if (inputs.rows() < 1) throw DomainError("dataset must contain at least one example");
  if (is_classification()) {
    require_same_dim(static_cast<long>(labels.size()), inputs.rows(), "dataset labels");
  } else {
    require_same_dim(targets.rows(), inputs.rows(), "dataset targets");
  }
}

Dataset Dataset::subset(BatchIndices rows) const {
  Dataset out;
  out.inputs.resize(static_cast<Index>(rows.size()), inputs.cols());
  if (is_classification()) {
    out.labels.reserve(rows.size());
  } else {
    out.targets.resize(static_cast<Index>(rows.size()), targets.cols());
  }
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Index r = rows[i];
    if (r < 0 || r >= size()) throw DomainError("batch index out of range");
    out.inputs.row(static_cast<Index>(i)) = inputs.row(r);
    if (is_classification()) {
      out.labels.push_back(labels[static_cast<std::size_t>(r)]);
    } else {
      out.targets.row(static_cast<Index>(i)) = targets.row(r);
    }
  }
  return out;
}

namespace {

struct LayerView {
  Eigen::Map<const Mat> W;
  Eigen::Map<const Vector<double>> b;
};

std::vector<LayerView> unpack(const NetworkSpec& spec, const ParamVector& params) {
  require_same_dim(params.size(), spec.num_params(), "network parameters");
  std::vector<LayerView> layers;
  const double* p = params.data();
  for (std::size_t l = 1; l < spec.layer_widths.size(); ++l) {
    const Index in = spec.layer_widths[l - 1];
    const Index out = spec.layer_widths[l];
    Eigen::Map<const Mat> W(p, out, in);
    p += out * in;
    Eigen::Map<const Vector<double>> b(p, spec.use_bias ? out : 0);
    if (spec.use_bias) p += out;
    layers.push_back({W, b});
  }
  return layers;
}

Mat activate(Activation a, const Mat& z) {
  switch (a) {
    case Activation::relu: return z.cwiseMax(0.0);
    case Activation::tanh: return z.array().tanh().matrix();
    case Activation::identity: return z;
  }
  return z;
}

// Derivative expressed through the pre-activation; relu'(0) := 0.
Mat activate_derivative(Activation a, const Mat& z) {
  switch (a) {
    case Activation::relu: return (z.array() > 0.0).cast<double>().matrix();
    case Activation::tanh: return (1.0 - z.array().tanh().square()).matrix();
    case Activation::identity: return Mat::Ones(z.rows(), z.cols());
  }
  return z;
}

struct ForwardCache {
  std::vector<Mat> pre;   // z_l, l = 1..L
  std::vector<Mat> post;  // a_l, l = 0..L (a_0 = inputs^T)
};

// Columns are examples.
ForwardCache run_forward(const NetworkSpec& spec, const std::vector<LayerView>& layers,
                         const Mat& inputs_t) {
  ForwardCache cache;
  cache.post.push_back(inputs_t);
  for (std::size_t l = 0; l < layers.size(); ++l) {
    Mat z = layers[l].W * cache.post.back();
    if (spec.use_bias) z.colwise() += layers[l].b;
    const bool output_layer = (l + 1 == layers.size());
    Mat a = output_layer ? z : activate(spec.activation, z);
    cache.pre.push_back(std::move(z));
    cache.post.push_back(std::move(a));
  }
  return cache;
}

// Per-example losses and dL/dz at the output layer (unscaled by 1/B).
struct OutputTerms {
  Vector<double> losses;
  Mat dz;
};

OutputTerms output_terms(const NetworkSpec& spec, const Mat& out, const Dataset& batch,
                         bool want_grad) {
  const Index B = out.cols();
  OutputTerms t;
  t.losses.resize(B);
  if (spec.loss == LossKind::squared_error) {
    if (batch.is_classification()) throw DomainError("squared_error needs real-valued targets");
    require_same_dim(batch.targets.cols(), spec.output_dim(), "target width");
    const Mat diff = out - batch.targets.transpose();
    t.losses = diff.colwise().squaredNorm().transpose();
    if (want_grad) t.dz = 2.0 * diff;
  } else {
    if (!batch.is_classification()) throw DomainError("cross_entropy needs class labels");
    if (want_grad) t.dz.resize(out.rows(), B);
    for (Index i = 0; i < B; ++i) {
      const int label = batch.labels[static_cast<std::size_t>(i)];
      if (label < 0 || label >= out.rows()) throw DomainError("label out of range");
      const double m = out.col(i).maxCoeff();
      const Vector<double> e = (out.col(i).array() - m).exp().matrix();
      const double z = e.sum();
      t.losses(i) = std::log(z) + m - out(label, i);
      if (want_grad) {
        t.dz.col(i) = e / z;
        t.dz(label, i) -= 1.0;
      }
    }
  }
  return t;
}

double mean_loss(const NetworkSpec& spec, const ParamVector& params, const Dataset& batch) {
  spec.validate();
  require_same_dim(batch.inputs.cols(), spec.input_dim(), "input width");
  if (batch.size() < 1) throw DomainError("empty batch");
  const auto layers = unpack(spec, params);
  const auto cache = run_forward(spec, layers, batch.inputs.transpose());
  const auto terms = output_terms(spec, cache.post.back(), batch, false);
  const double loss = terms.losses.mean();
  if (!std::isfinite(loss)) throw NumericError("non-finite loss in forward pass");
  return loss;
}

ParamVector mean_gradient(const NetworkSpec& spec, const ParamVector& params, const Dataset& batch) {
  spec.validate();
  require_same_dim(batch.inputs.cols(), spec.input_dim(), "input width");
  if (batch.size() < 1) throw DomainError("empty batch");
  const auto layers = unpack(spec, params);
  const auto cache = run_forward(spec, layers, batch.inputs.transpose());
  auto terms = output_terms(spec, cache.post.back(), batch, true);
  if (!terms.losses.allFinite()) throw NumericError("non-finite loss in forward pass");

  ParamVector grad(params.size());
  std::vector<Index> offsets;
  Index off = 0;
  for (const auto& layer : layers) {
    offsets.push_back(off);
    off += layer.W.size() + layer.b.size();
  }

  Mat delta = terms.dz / static_cast<double>(batch.size());
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Index in = layers[l].W.cols();
    const Index out = layers[l].W.rows();
    Eigen::Map<Mat> dW(grad.data() + offsets[l], out, in);
    dW.noalias() = delta * cache.post[l].transpose();
    if (spec.use_bias) {
      Eigen::Map<Vector<double>> db(grad.data() + offsets[l] + out * in, out);
      db = delta.rowwise().sum();
    }
    if (l > 0) {
      Mat back = layers[l].W.transpose() * delta;
      delta = back.cwiseProduct(activate_derivative(spec.activation, cache.pre[l - 1]));
    }
  }
  if (!grad.allFinite()) throw NumericError("non-finite gradient");
  return grad;
}

}  // namespace

double forward(const NetworkSpec& spec, const ParamVector& params, const Dataset& data) {
  return mean_loss(spec, params, data);
}

double forward(const NetworkSpec& spec, const ParamVector& params, const Dataset& data,
               BatchIndices batch) {
  return mean_loss(spec, params, data.subset(batch));
}

ParamVector gradient(const NetworkSpec& spec, const ParamVector& params, const Dataset& data) {
  return mean_gradient(spec, params, data);
}

ParamVector gradient(const NetworkSpec& spec, const ParamVector& params, const Dataset& data,
                     BatchIndices batch) {
  return mean_gradient(spec, params, data.subset(batch));
}

Mat predict(const NetworkSpec& spec, const ParamVector& params, const Mat& inputs) {
  spec.validate();
  require_same_dim(inputs.cols(), spec.input_dim(), "input width");
  const auto layers = unpack(spec, params);
  return run_forward(spec, layers, inputs.transpose()).post.back().transpose();
}

double accuracy(const NetworkSpec& spec, const ParamVector& params, const Dataset& data) {
  if (!data.is_classification()) return std::numeric_limits<double>::quiet_NaN();
  const Mat out = predict(spec, params, data.inputs);
  Index correct = 0;
  for (Index i = 0; i < out.rows(); ++i) {
    Index arg = 0;
    out.row(i).maxCoeff(&arg);
    if (arg == data.labels[static_cast<std::size_t>(i)]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(out.rows());
}

double grad_check(const NetworkSpec& spec, const ParamVector& params, const Dataset& data,
                  BatchIndices batch, double eps) {
  if (!(eps > 0.0)) throw DomainError("grad_check: eps must be positive");
  const Dataset sub = data.subset(batch);
  const ParamVector analytic = mean_gradient(spec, params, sub);
  ParamVector probe = params;
  double worst = 0.0;
  for (Index j = 0; j < params.size(); ++j) {
    probe(j) = params(j) + eps;
    const double up = mean_loss(spec, probe, sub);
    probe(j) = params(j) - eps;
    const double down = mean_loss(spec, probe, sub);
    probe(j) = params(j);
    const double fd = (up - down) / (2.0 * eps);
    worst = std::max(worst, std::abs(analytic(j) - fd) / std::max(1.0, std::abs(analytic(j))));
  }
  return worst;
}

ParamVector init_params(const NetworkSpec& spec, std::uint64_t seed, double scale) {
  spec.validate();
  Rng rng(seed);
  ParamVector w(spec.num_params());
  Index k = 0;
  for (std::size_t l = 1; l < spec.layer_widths.size(); ++l) {
    const Index in = spec.layer_widths[l - 1];
    const Index out = spec.layer_widths[l];
    const double sd = scale * std::sqrt(2.0 / static_cast<double>(in + out));
    for (Index i = 0; i < in * out; ++i) w(k++) = rng.normal(0.0, sd);
    if (spec.use_bias) {
      for (Index i = 0; i < out; ++i) w(k++) = 0.0;
    }
  }
  return w;
}

NetworkObjective::NetworkObjective(NetworkSpec spec, Dataset data)
    : spec_(std::move(spec)), data_(std::move(data)) {
  spec_.validate();
  data_.validate();
  require_same_dim(data_.inputs.cols(), spec_.input_dim(), "input width");
}

double NetworkObjective::loss(const ParamVector& w, BatchIndices batch) const {
  return forward(spec_, w, data_, batch);
}

ParamVector NetworkObjective::gradient(const ParamVector& w, BatchIndices batch) const {
  return dprune::gradient(spec_, w, data_, batch);
}

double NetworkObjective::loss(const ParamVector& w) const { return forward(spec_, w, data_); }

ParamVector NetworkObjective::gradient(const ParamVector& w) const {
  return dprune::gradient(spec_, w, data_);
}

QuadraticObjective::QuadraticObjective(Mat hessian, ParamVector minimizer)
    : hessian_(std::move(hessian)), minimizer_(std::move(minimizer)) {
  require_same_dim(hessian_.rows(), minimizer_.size(), "quadratic objective");
  require_same_dim(hessian_.cols(), minimizer_.size(), "quadratic objective");
}

double QuadraticObjective::loss(const ParamVector& w) const {
  require_same_dim(w.size(), minimizer_.size(), "quadratic objective");
  const ParamVector r = w - minimizer_;
  return 0.5 * r.dot(hessian_ * r);
}

ParamVector QuadraticObjective::gradient(const ParamVector& w) const {
  require_same_dim(w.size(), minimizer_.size(), "quadratic objective");
  return hessian_ * (w - minimizer_);
}

}  // namespace dprune
