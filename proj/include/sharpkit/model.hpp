#pragma once

#include <cstdint>
#include <vector>

#include "sharpkit/common.hpp"
#include "sharpkit/dataset.hpp"

// Differentiable loss evaluation for a small dense-model zoo: parameter
// initialization, loss, analytic gradients, full-dataset gradients, and
// finite-difference Hessian-vector products.

namespace sharpkit::model {

enum class ModelKind { LinearRegression, LogisticSoftmax, Mlp };
enum class Activation { Tanh, Relu };
enum class LossKind { Mse, CrossEntropy };

struct ModelSpec {
  ModelKind kind = ModelKind::LinearRegression;
  std::vector<int> layer_sizes = {2, 1};  // input -> hidden... -> output
  Activation activation = Activation::Tanh;
  LossKind loss = LossKind::Mse;

  // Throws ConfigError on an inconsistent spec.
  void validate() const;
  int input_dim() const { return layer_sizes.front(); }
  int output_dim() const { return layer_sizes.back(); }
};

// Total number of parameters: sum over layers of out*in + out.
long param_count(const ModelSpec& spec);

// Per-layer uniform [-sqrt(6/(fan_in+fan_out)), +...] weights, zero biases.
ParamVector init_params(const ModelSpec& spec, std::uint64_t seed);

struct GradResult {
  double loss = 0.0;
  ParamVector grad;
};

// Mean per-example loss over the batch. Per-example: mse 0.5*|f(x)-y|^2,
// cross-entropy -log softmax(f(x))[y] with log-sum-exp stabilization.
double loss(const ModelSpec& spec, const ParamVector& params, const Batch& batch);

// Analytic gradient of loss(., batch) plus the loss value from the same pass.
GradResult grad(const ModelSpec& spec, const ParamVector& params, const Batch& batch);

// Gradient of the mean loss over the entire dataset.
ParamVector full_grad(const ModelSpec& spec, const ParamVector& params, const Dataset& dataset);

// Network outputs (logits or regression values) for one dataset row.
std::vector<double> predict(const ModelSpec& spec, const ParamVector& params,
                            const Dataset& dataset, int row);

// Central-difference Hessian-vector product:
// (grad(w + h*v_hat) - grad(w - h*v_hat)) / (2h) * |v|, v_hat = v/|v|.
ParamVector hvp(const ModelSpec& spec, const ParamVector& params, const Batch& batch,
                const ParamVector& v, double h);

// Curvature-probe step size used when no explicit h is given.
double default_hvp_step(const ParamVector& params);

}  // namespace sharpkit::model
