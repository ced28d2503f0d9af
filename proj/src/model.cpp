#include "sharpkit/model.hpp"

#include <cmath>
#include <random>
#include <string>

#include "sharpkit/vec.hpp"

namespace sharpkit::model {

namespace {

int layer_count(const ModelSpec& spec) {
  return static_cast<int>(spec.layer_sizes.size()) - 1;
}

double activate(Activation a, double z) {
  return a == Activation::Tanh ? std::tanh(z) : (z > 0.0 ? z : 0.0);
}

double activate_deriv(Activation a, double z) {
  if (a == Activation::Tanh) {
    const double t = std::tanh(z);
    return 1.0 - t * t;
  }
  return z > 0.0 ? 1.0 : 0.0;
}

// Scratch buffers reused across the examples of one batch.
struct Workspace {
  std::vector<std::vector<double>> pre;   // z_l per layer
  std::vector<std::vector<double>> act;   // a_l per layer (act[0] = input copy)
  std::vector<std::vector<double>> delta; // backprop errors per layer
};

void ensure_workspace(const ModelSpec& spec, Workspace& ws) {
  const int L = layer_count(spec);
  ws.pre.resize(L);
  ws.delta.resize(L);
  ws.act.resize(L + 1);
  ws.act[0].resize(spec.layer_sizes[0]);
  for (int l = 0; l < L; ++l) {
    ws.pre[l].resize(spec.layer_sizes[l + 1]);
    ws.delta[l].resize(spec.layer_sizes[l + 1]);
    ws.act[l + 1].resize(spec.layer_sizes[l + 1]);
  }
}

// params layout: per layer l, W_l row-major (out x in) then b_l (out).
void forward(const ModelSpec& spec, const ParamVector& params, const double* x,
             Workspace& ws) {
  const int L = layer_count(spec);
  for (int i = 0; i < spec.layer_sizes[0]; ++i) ws.act[0][i] = x[i];
  std::size_t off = 0;
  for (int l = 0; l < L; ++l) {
    const int in = spec.layer_sizes[l];
    const int out = spec.layer_sizes[l + 1];
    const double* W = params.data() + off;
    const double* b = params.data() + off + static_cast<std::size_t>(out) * in;
    for (int o = 0; o < out; ++o) {
      double z = b[o];
      const double* wrow = W + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) z += wrow[i] * ws.act[l][i];
      ws.pre[l][o] = z;
      ws.act[l + 1][o] = (l + 1 == L) ? z : activate(spec.activation, z);
    }
    off += static_cast<std::size_t>(out) * in + out;
  }
}

// Per-example loss and output-layer delta from the forward pass in ws.
double example_loss_and_delta(const ModelSpec& spec, const Dataset& ds, int row,
                              Workspace& ws, bool want_delta) {
  const int L = layer_count(spec);
  const std::vector<double>& y_hat = ws.act[L];
  const int out = spec.layer_sizes[L];
  if (spec.loss == LossKind::Mse) {
    if (ds.targets.cols != out) {
      throw DimensionError("loss: target width " + std::to_string(ds.targets.cols) +
                           " does not match output width " + std::to_string(out));
    }
    double ell = 0.0;
    for (int o = 0; o < out; ++o) {
      const double r = y_hat[o] - ds.targets.at(row, o);
      ell += 0.5 * r * r;
      if (want_delta) ws.delta[L - 1][o] = r;
    }
    return ell;
  }
  // cross-entropy over softmax(logits)
  const int label = ds.labels[static_cast<std::size_t>(row)];
  if (label < 0 || label >= out) {
    throw DimensionError("loss: label " + std::to_string(label) +
                         " outside [0," + std::to_string(out) + ")");
  }
  double zmax = y_hat[0];
  for (int o = 1; o < out; ++o) zmax = std::max(zmax, y_hat[o]);
  double sum = 0.0;
  for (int o = 0; o < out; ++o) sum += std::exp(y_hat[o] - zmax);
  const double lse = zmax + std::log(sum);
  if (want_delta) {
    for (int o = 0; o < out; ++o) {
      ws.delta[L - 1][o] = std::exp(y_hat[o] - lse) - (o == label ? 1.0 : 0.0);
    }
  }
  return lse - y_hat[label];
}

void backward_accumulate(const ModelSpec& spec, const ParamVector& params,
                         Workspace& ws, ParamVector& acc) {
  const int L = layer_count(spec);
  std::vector<std::size_t> offsets(L);
  {
    std::size_t off = 0;
    for (int l = 0; l < L; ++l) {
      offsets[l] = off;
      off += static_cast<std::size_t>(spec.layer_sizes[l + 1]) * spec.layer_sizes[l] +
             spec.layer_sizes[l + 1];
    }
  }
  for (int l = L - 1; l >= 1; --l) {
    const int in = spec.layer_sizes[l];
    const int out = spec.layer_sizes[l + 1];
    const double* W = params.data() + offsets[l];
    for (int i = 0; i < in; ++i) {
      double s = 0.0;
      for (int o = 0; o < out; ++o) {
        s += W[static_cast<std::size_t>(o) * in + i] * ws.delta[l][o];
      }
      ws.delta[l - 1][i] = s * activate_deriv(spec.activation, ws.pre[l - 1][i]);
    }
  }
  for (int l = 0; l < L; ++l) {
    const int in = spec.layer_sizes[l];
    const int out = spec.layer_sizes[l + 1];
    double* gW = acc.data() + offsets[l];
    double* gb = gW + static_cast<std::size_t>(out) * in;
    for (int o = 0; o < out; ++o) {
      const double d = ws.delta[l][o];
      double* grow = gW + static_cast<std::size_t>(o) * in;
      for (int i = 0; i < in; ++i) grow[i] += d * ws.act[l][i];
      gb[o] += d;
    }
  }
}

void check_batch(const ModelSpec& spec, const ParamVector& params, const Batch& batch) {
  if (batch.data == nullptr || batch.indices.empty()) {
    throw DimensionError("batch is empty");
  }
  if (batch.data->features.cols != spec.input_dim()) {
    throw DimensionError("batch feature width " + std::to_string(batch.data->features.cols) +
                         " does not match model input " + std::to_string(spec.input_dim()));
  }
  if (static_cast<long>(params.size()) != param_count(spec)) {
    throw DimensionError("parameter vector length " + std::to_string(params.size()) +
                         " does not match spec (" + std::to_string(param_count(spec)) + ")");
  }
}

}  // namespace

void ModelSpec::validate() const {
  if (layer_sizes.size() < 2) {
    throw ConfigError("model: layer_sizes needs at least input and output");
  }
  for (int s : layer_sizes) {
    if (s <= 0) throw ConfigError("model: layer sizes must be positive");
  }
  if (kind != ModelKind::Mlp && layer_sizes.size() != 2) {
    throw ConfigError("model: linear-regression/logistic-softmax take exactly [in, out]");
  }
  if (kind == ModelKind::LinearRegression && loss != LossKind::Mse) {
    throw ConfigError("model: linear-regression requires mse loss");
  }
  if (kind == ModelKind::LogisticSoftmax && loss != LossKind::CrossEntropy) {
    throw ConfigError("model: logistic-softmax requires cross-entropy loss");
  }
  if (loss == LossKind::CrossEntropy && layer_sizes.back() < 2) {
    throw ConfigError("model: cross-entropy requires at least 2 output units");
  }
}

long param_count(const ModelSpec& spec) {
  long n = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    n += static_cast<long>(spec.layer_sizes[l + 1]) * spec.layer_sizes[l] +
         spec.layer_sizes[l + 1];
  }
  return n;
}

ParamVector init_params(const ModelSpec& spec, std::uint64_t seed) {
  spec.validate();
  ParamVector p(static_cast<std::size_t>(param_count(spec)), 0.0);
  std::mt19937_64 rng(seed);
  std::size_t off = 0;
  for (std::size_t l = 0; l + 1 < spec.layer_sizes.size(); ++l) {
    const int in = spec.layer_sizes[l];
    const int out = spec.layer_sizes[l + 1];
    const double r = std::sqrt(6.0 / (in + out));
    std::uniform_real_distribution<double> dist(-r, r);
    for (long i = 0; i < static_cast<long>(out) * in; ++i) p[off + i] = dist(rng);
    off += static_cast<std::size_t>(out) * in + out;  // biases stay zero
  }
  return p;
}

double loss(const ModelSpec& spec, const ParamVector& params, const Batch& batch) {
  check_batch(spec, params, batch);
  Workspace ws;
  ensure_workspace(spec, ws);
  double total = 0.0;
  for (int idx : batch.indices) {
    forward(spec, params, batch.data->features.row(idx), ws);
    total += example_loss_and_delta(spec, *batch.data, idx, ws, false);
  }
  return total / batch.size();
}

GradResult grad(const ModelSpec& spec, const ParamVector& params, const Batch& batch) {
  check_batch(spec, params, batch);
  Workspace ws;
  ensure_workspace(spec, ws);
  GradResult res;
  res.grad.assign(params.size(), 0.0);
  for (int idx : batch.indices) {
    forward(spec, params, batch.data->features.row(idx), ws);
    res.loss += example_loss_and_delta(spec, *batch.data, idx, ws, true);
    backward_accumulate(spec, params, ws, res.grad);
  }
  const double inv = 1.0 / batch.size();
  res.loss *= inv;
  for (double& g : res.grad) g *= inv;
  return res;
}

ParamVector full_grad(const ModelSpec& spec, const ParamVector& params, const Dataset& dataset) {
  if (dataset.size() == 0) throw DimensionError("full_grad: empty dataset");
  return grad(spec, params, Batch::whole(dataset)).grad;
}

std::vector<double> predict(const ModelSpec& spec, const ParamVector& params,
                            const Dataset& dataset, int row) {
  Batch probe;
  probe.data = &dataset;
  probe.indices = {row};
  check_batch(spec, params, probe);
  Workspace ws;
  ensure_workspace(spec, ws);
  forward(spec, params, dataset.features.row(row), ws);
  return ws.act.back();
}

ParamVector hvp(const ModelSpec& spec, const ParamVector& params, const Batch& batch,
                const ParamVector& v, double h) {
  check_same_length(params, v, "hvp");
  if (h <= 0.0) throw DomainError("hvp: h must be positive");
  const double vn = norm2(v);
  if (vn < kZeroTol) throw DomainError("hvp: zero direction");
  ParamVector vhat = scaled(v, 1.0 / vn);
  ParamVector wp = params;
  axpy(h, vhat, wp);
  ParamVector wm = params;
  axpy(-h, vhat, wm);
  ParamVector gp = grad(spec, wp, batch).grad;
  ParamVector gm = grad(spec, wm, batch).grad;
  ParamVector r(params.size());
  const double c = vn / (2.0 * h);
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = (gp[i] - gm[i]) * c;
  return r;
}

double default_hvp_step(const ParamVector& params) {
  return 1e-3 * (1.0 + norm2(params));
}

}  // namespace sharpkit::model
