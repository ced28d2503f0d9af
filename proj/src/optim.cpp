#include "sharpkit/optim.hpp"

#include <cmath>

namespace sharpkit::optim {

namespace {

// Coupled-L2 base update: g <- g' + wd*w; buf <- mu*buf + g; w' <- w - lr*buf.
ParamVector base_update(const ParamVector& params, const ParamVector& g_perturbed,
                        const OptimizerConfig& config, OptimizerState& state, double lr) {
  ParamVector next = params;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = g_perturbed[i] + config.weight_decay * params[i];
    state.momentum_buffer[i] = config.momentum * state.momentum_buffer[i] + g;
    next[i] -= lr * state.momentum_buffer[i];
  }
  return next;
}

double effective_sigma(const OptimizerConfig& config, const numkit::EmaState& ema,
                       const ParamVector& g) {
  if (config.sigma_mode == SigmaMode::Constant) return config.sigma;
  return numkit::cosine_similarity(ema.m, g);
}

// |w_i| + eta, elementwise.
ParamVector asam_tw(const ParamVector& params, double eta) {
  ParamVector t(params.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = std::abs(params[i]) + eta;
  return t;
}

struct PerturbPlan {
  ParamVector epsilon;
  double perturb_norm = 0.0;
};

PerturbPlan euclidean_perturbation(const ParamVector& d, double rho) {
  PerturbPlan plan;
  plan.epsilon = numkit::perturbation(d, rho);
  plan.perturb_norm = norm2(plan.epsilon);
  return plan;
}

// eps = rho * Tw^2 d / |Tw d|. The radius lives in the Tw^-1 metric, so the
// reported perturb_norm is rho itself (0 on a degenerate direction).
PerturbPlan asam_perturbation(const ParamVector& params, const ParamVector& d,
                              double rho, double eta) {
  PerturbPlan plan;
  const ParamVector tw = asam_tw(params, eta);
  ParamVector twd(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) twd[i] = tw[i] * d[i];
  const double n = norm2(twd);
  if (rho == 0.0 || n < kZeroTol) {
    plan.epsilon.assign(d.size(), 0.0);
    return plan;
  }
  plan.epsilon.resize(d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    plan.epsilon[i] = rho * tw[i] * tw[i] * d[i] / n;
  }
  plan.perturb_norm = rho;
  return plan;
}

// Shared tail: update EMA from the unperturbed gradient, form d, perturb,
// take the gradient at w+eps, and apply the base update.
StepResult finish_step(const model::ModelSpec& spec, const ParamVector& params,
                       const Batch& descent_batch, const OptimizerConfig& config,
                       OptimizerState& state, double lr, const model::GradResult& g_used,
                       const ParamVector& d, const PerturbPlan& plan,
                       long extra_grad_evals) {
  StepResult res;
  res.report.loss_at_w = g_used.loss;
  res.report.grad_norm = norm2(g_used.grad);
  res.report.d_norm = norm2(d);
  res.report.perturb_norm = plan.perturb_norm;
  res.report.cosine_g_m = numkit::cosine_similarity(g_used.grad, state.ema.m);
  res.report.extra_grad_evals = extra_grad_evals;

  if (plan.perturb_norm == 0.0) {
    // Degenerate or rho=0 direction: plain base step from the gradient at w.
    // SAM-family variants still pay the second gradient evaluation.
    if (config.variant == Variant::Sgd) {
      res.report.loss_at_perturbed = g_used.loss;
      res.params = base_update(params, g_used.grad, config, state, lr);
    } else {
      const model::GradResult g2 = model::grad(spec, params, descent_batch);
      res.report.loss_at_perturbed = g2.loss;
      res.params = base_update(params, g2.grad, config, state, lr);
    }
  } else {
    ParamVector perturbed = params;
    axpy(1.0, plan.epsilon, perturbed);
    const model::GradResult g2 = model::grad(spec, perturbed, descent_batch);
    res.report.loss_at_perturbed = g2.loss;
    res.params = base_update(params, g2.grad, config, state, lr);
  }
  state.step += 1;
  return res;
}

}  // namespace

std::string variant_name(Variant v) {
  switch (v) {
    case Variant::Sgd: return "sgd";
    case Variant::Sam: return "sam";
    case Variant::Fsam: return "fsam";
    case Variant::Asam: return "asam";
    case Variant::Fasam: return "fasam";
    case Variant::SamFull: return "sam-full";
    case Variant::SamDb: return "sam-db";
    case Variant::SamNoise: return "sam-noise";
    case Variant::SamStrength: return "sam-strength";
  }
  return "sgd";
}

Variant variant_from_name(const std::string& name) {
  if (name == "sgd") return Variant::Sgd;
  if (name == "sam") return Variant::Sam;
  if (name == "fsam") return Variant::Fsam;
  if (name == "asam") return Variant::Asam;
  if (name == "fasam") return Variant::Fasam;
  if (name == "sam-full") return Variant::SamFull;
  if (name == "sam-db") return Variant::SamDb;
  if (name == "sam-noise") return Variant::SamNoise;
  if (name == "sam-strength") return Variant::SamStrength;
  throw ConfigError("unknown optimizer variant: " + name);
}

void OptimizerConfig::validate() const {
  if (rho < 0.0) throw ConfigError("optimizer: rho must be >= 0");
  if (lambda < 0.0 || lambda > 1.0) throw ConfigError("optimizer: lambda must be in [0,1]");
  if (momentum < 0.0 || momentum >= 1.0) throw ConfigError("optimizer: momentum must be in [0,1)");
  if (weight_decay < 0.0) throw ConfigError("optimizer: weight_decay must be >= 0");
  if (gamma0 <= 0.0) throw ConfigError("optimizer: gamma0 must be > 0");
  if (asam_eta < 0.0) throw ConfigError("optimizer: asam_eta must be >= 0");
  if (strength_k < 1) throw ConfigError("optimizer: strength_k must be >= 1");
  if (strength_k != 1 && variant != Variant::SamStrength) {
    throw ConfigError("optimizer: strength_k is only valid with variant sam-strength");
  }
}

double lr_at(const OptimizerConfig& config, long t, long T_total) {
  switch (config.lr_schedule) {
    case LrSchedule::Constant:
      return config.gamma0;
    case LrSchedule::Cosine:
      if (T_total <= 0) throw ConfigError("cosine schedule needs T_total > 0");
      return config.gamma0 * (1.0 + std::cos(M_PI * static_cast<double>(t) / T_total)) / 2.0;
    case LrSchedule::InvSqrtTotal:
      if (T_total <= 0) throw ConfigError("inv-sqrt-total schedule needs T_total > 0");
      return config.gamma0 / std::sqrt(static_cast<double>(T_total));
  }
  return config.gamma0;
}

double rho_at(const OptimizerConfig& config, long t) {
  if (config.rho_schedule == RhoSchedule::Constant) return config.rho;
  return config.rho / std::sqrt(static_cast<double>(t) + 1.0);
}

StepResult step_sgd(const model::ModelSpec& spec, const ParamVector& params,
                    const Batch& batch, const OptimizerConfig& config,
                    OptimizerState& state, double lr) {
  const model::GradResult g = model::grad(spec, params, batch);
  state.ema = numkit::ema_update(state.ema, g.grad);
  PerturbPlan plan;
  plan.epsilon.assign(params.size(), 0.0);
  return finish_step(spec, params, batch, config, state, lr, g, g.grad, plan, 0);
}

StepResult step_sam(const model::ModelSpec& spec, const ParamVector& params,
                    const Batch& batch, const OptimizerConfig& config,
                    OptimizerState& state, double lr, double rho) {
  const model::GradResult g = model::grad(spec, params, batch);
  state.ema = numkit::ema_update(state.ema, g.grad);
  const PerturbPlan plan = euclidean_perturbation(g.grad, rho);
  return finish_step(spec, params, batch, config, state, lr, g, g.grad, plan, batch.size());
}

StepResult step_fsam(const model::ModelSpec& spec, const ParamVector& params,
                     const Batch& batch, const OptimizerConfig& config,
                     OptimizerState& state, double lr, double rho) {
  const model::GradResult g = model::grad(spec, params, batch);
  state.ema = numkit::ema_update(state.ema, g.grad);  // before forming d_t
  const double sigma = effective_sigma(config, state.ema, g.grad);
  ParamVector d = g.grad;
  axpy(-sigma, state.ema.m, d);
  const PerturbPlan plan = euclidean_perturbation(d, rho);
  return finish_step(spec, params, batch, config, state, lr, g, d, plan, batch.size());
}

StepResult step_asam(const model::ModelSpec& spec, const ParamVector& params,
                     const Batch& batch, const OptimizerConfig& config,
                     OptimizerState& state, double lr, double rho) {
  const model::GradResult g = model::grad(spec, params, batch);
  state.ema = numkit::ema_update(state.ema, g.grad);
  const PerturbPlan plan = asam_perturbation(params, g.grad, rho, config.asam_eta);
  return finish_step(spec, params, batch, config, state, lr, g, g.grad, plan, batch.size());
}

StepResult step_fasam(const model::ModelSpec& spec, const ParamVector& params,
                      const Batch& batch, const OptimizerConfig& config,
                      OptimizerState& state, double lr, double rho) {
  const model::GradResult g = model::grad(spec, params, batch);
  state.ema = numkit::ema_update(state.ema, g.grad);
  const double sigma = effective_sigma(config, state.ema, g.grad);
  ParamVector d = g.grad;
  axpy(-sigma, state.ema.m, d);
  const PerturbPlan plan = asam_perturbation(params, d, rho, config.asam_eta);
  return finish_step(spec, params, batch, config, state, lr, g, d, plan, batch.size());
}

StepResult step_sam_full(const model::ModelSpec& spec, const ParamVector& params,
                         const Batch& batch, const Dataset& dataset,
                         const OptimizerConfig& config, OptimizerState& state,
                         double lr, double rho) {
  const model::GradResult g = model::grad(spec, params, batch);
  state.ema = numkit::ema_update(state.ema, g.grad);
  const ParamVector gf = model::full_grad(spec, params, dataset);
  const PerturbPlan plan = euclidean_perturbation(gf, rho);
  return finish_step(spec, params, batch, config, state, lr, g, gf, plan,
                     batch.size() + dataset.size());
}

StepResult step_sam_db(const model::ModelSpec& spec, const ParamVector& params,
                       const Batch& batch, const Dataset& dataset,
                       const OptimizerConfig& config, OptimizerState& state,
                       double lr, double rho) {
  // Independent same-size batch, drawn with replacement from state.rng so
  // the primary epoch stream is left untouched.
  Batch extra;
  extra.data = &dataset;
  extra.indices.resize(batch.indices.size());
  std::uniform_int_distribution<int> pick(0, dataset.size() - 1);
  for (int& idx : extra.indices) idx = pick(state.rng);

  const model::GradResult g = model::grad(spec, params, extra);
  state.ema = numkit::ema_update(state.ema, g.grad);
  const PerturbPlan plan = euclidean_perturbation(g.grad, rho);
  return finish_step(spec, params, batch, config, state, lr, g, g.grad, plan, batch.size());
}

StepResult step_sam_noise(const model::ModelSpec& spec, const ParamVector& params,
                          const Batch& batch, const Dataset& dataset,
                          const OptimizerConfig& config, OptimizerState& state,
                          double lr, double rho) {
  const model::GradResult g = model::grad(spec, params, batch);
  state.ema = numkit::ema_update(state.ema, g.grad);
  const ParamVector gf = model::full_grad(spec, params, dataset);
  const numkit::Decomposition dec = numkit::decompose_paper(gf, g.grad);
  const PerturbPlan plan = euclidean_perturbation(dec.noise_component, rho);
  return finish_step(spec, params, batch, config, state, lr, g, dec.noise_component, plan,
                     batch.size() + dataset.size());
}

StepResult step_sam_strength(const model::ModelSpec& spec, const ParamVector& params,
                             const Batch& inner, const Batch& outer,
                             const OptimizerConfig& config, OptimizerState& state,
                             double lr, double rho) {
  const model::GradResult g = model::grad(spec, params, outer);
  state.ema = numkit::ema_update(state.ema, g.grad);
  const PerturbPlan plan = euclidean_perturbation(g.grad, rho);
  return finish_step(spec, params, inner, config, state, lr, g, g.grad, plan, outer.size());
}

}  // namespace sharpkit::optim
