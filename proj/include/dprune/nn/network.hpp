#pragma once

#include <dprune/error.hpp>
#include <dprune/linalg.hpp>

#include <string>
#include <string_view>
#include <vector>

namespace dprune {

enum class Activation { relu, tanh, identity };
enum class LossKind { squared_error, cross_entropy };

std::string_view to_string(Activation a);
std::string_view to_string(LossKind l);
Activation parse_activation(std::string_view s);
LossKind parse_loss(std::string_view s);

/// Fully connected feed-forward network. The activation applies to hidden
/// layers; the output layer is affine (logits for cross entropy).
struct NetworkSpec {
  std::vector<Index> layer_widths;  // input, hidden..., output
  Activation activation = Activation::tanh;
  LossKind loss = LossKind::squared_error;
  bool use_bias = true;

  /// Throws DomainError when the invariants do not hold.
  void validate() const;
  Index num_params() const;
  Index input_dim() const { return layer_widths.front(); }
  Index output_dim() const { return layer_widths.back(); }

  bool operator==(const NetworkSpec&) const = default;
};

/// Inputs are stored one example per row. Regression targets live in
/// `targets` (N x n_out); classification uses `labels` and leaves `targets`
/// empty.
struct Dataset {
  Mat inputs;
  Mat targets;
  std::vector<int> labels;

  Index size() const { return inputs.rows(); }
  bool is_classification() const { return !labels.empty(); }
  void validate() const;
  Dataset subset(BatchIndices rows) const;
};

/// Mean per-example loss over the full dataset.
double forward(const NetworkSpec& spec, const ParamVector& params, const Dataset& data);
/// Mean per-example loss over `batch` rows of `data`.
double forward(const NetworkSpec& spec, const ParamVector& params, const Dataset& data,
               BatchIndices batch);

ParamVector gradient(const NetworkSpec& spec, const ParamVector& params, const Dataset& data);
ParamVector gradient(const NetworkSpec& spec, const ParamVector& params, const Dataset& data,
                     BatchIndices batch);

/// Network outputs (N x n_out); logits for cross entropy.
Mat predict(const NetworkSpec& spec, const ParamVector& params, const Mat& inputs);

/// Fraction of correctly classified rows. NaN for regression data.
double accuracy(const NetworkSpec& spec, const ParamVector& params, const Dataset& data);

/// max_j |analytic_j - fd_j| / max(1, |analytic_j|) with central differences.
double grad_check(const NetworkSpec& spec, const ParamVector& params, const Dataset& data,
                  BatchIndices batch, double eps);

/// Glorot-style random initialisation of weights, zero biases.
ParamVector init_params(const NetworkSpec& spec, std::uint64_t seed, double scale = 1.0);

/// A differentiable empirical risk: mean of per-example losses over the
/// examples selected by a batch. Everything downstream of nn-core (optimizers,
/// Hessians, flows, curves) talks to this interface only.
class Objective {
 public:
  virtual ~Objective() = default;
  virtual Index dim() const = 0;
  virtual Index num_examples() const = 0;
  virtual double loss(const ParamVector& w, BatchIndices batch) const = 0;
  virtual ParamVector gradient(const ParamVector& w, BatchIndices batch) const = 0;
  virtual double loss(const ParamVector& w) const = 0;
  virtual ParamVector gradient(const ParamVector& w) const = 0;
};

class NetworkObjective final : public Objective {
 public:
  NetworkObjective(NetworkSpec spec, Dataset data);

  Index dim() const override { return spec_.num_params(); }
  Index num_examples() const override { return data_.size(); }
  double loss(const ParamVector& w, BatchIndices batch) const override;
  ParamVector gradient(const ParamVector& w, BatchIndices batch) const override;
  double loss(const ParamVector& w) const override;
  ParamVector gradient(const ParamVector& w) const override;

  const NetworkSpec& spec() const { return spec_; }
  const Dataset& data() const { return data_; }

 private:
  NetworkSpec spec_;
  Dataset data_;
};

/// 0.5 (w - w*)^T H (w - w*) with a single "example"; batches are ignored.
class QuadraticObjective final : public Objective {
 public:
  QuadraticObjective(Mat hessian, ParamVector minimizer);

  Index dim() const override { return minimizer_.size(); }
  Index num_examples() const override { return 1; }
  double loss(const ParamVector& w, BatchIndices) const override { return loss(w); }
  ParamVector gradient(const ParamVector& w, BatchIndices) const override { return gradient(w); }
  double loss(const ParamVector& w) const override;
  ParamVector gradient(const ParamVector& w) const override;

  const Mat& hessian() const { return hessian_; }
  const ParamVector& minimizer() const { return minimizer_; }

 private:
  Mat hessian_;
  ParamVector minimizer_;
};

}  // namespace dprune
