#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "sharpkit/common.hpp"
#include "sharpkit/dataset.hpp"
#include "sharpkit/model.hpp"
#include "sharpkit/numkit.hpp"

// The optimizer family: base SGD, SAM, F-SAM, ASAM/F-ASAM, the four
// investigative perturbation variants, and the lr / radius schedules.

namespace sharpkit::optim {

enum class Variant { Sgd, Sam, Fsam, Asam, Fasam, SamFull, SamDb, SamNoise, SamStrength };
enum class SigmaMode { Constant, Cosine };
enum class LrSchedule { Constant, Cosine, InvSqrtTotal };
enum class RhoSchedule { Constant, InvSqrtStep };

std::string variant_name(Variant v);
Variant variant_from_name(const std::string& name);

struct OptimizerConfig {
  Variant variant = Variant::Sgd;
  double rho = 0.1;            // perturbation radius
  double lambda = 0.9;         // EMA factor
  double sigma = 1.0;          // projection constant
  SigmaMode sigma_mode = SigmaMode::Constant;
  double momentum = 0.9;
  double weight_decay = 0.0005;
  int strength_k = 1;          // outer/inner batch ratio for sam-strength
  LrSchedule lr_schedule = LrSchedule::Cosine;
  RhoSchedule rho_schedule = RhoSchedule::Constant;
  double gamma0 = 0.05;        // initial learning rate
  double asam_eta = 0.01;      // |w| offset in the ASAM normalization

  void validate() const;  // throws ConfigError
};

// Per-run mutable state. The EMA is fed the unperturbed gradient by every
// variant so the cosine diagnostic and Theorem-1 traces are comparable
// across variants; only fsam/fasam read it back into the update.
struct OptimizerState {
  numkit::EmaState ema;
  ParamVector momentum_buffer;
  long step = 0;
  std::mt19937_64 rng;  // extra-batch draws inside sam-db

  OptimizerState() = default;
  OptimizerState(std::size_t dim, double lambda, std::uint64_t seed)
      : ema(dim, lambda), momentum_buffer(dim, 0.0), rng(seed) {}
};

struct StepReport {
  double loss_at_w = 0.0;
  double loss_at_perturbed = 0.0;
  double grad_norm = 0.0;      // gradient the perturbation direction was built from
  double perturb_norm = 0.0;   // radius actually used (0 for a degenerate direction)
  double d_norm = 0.0;         // pre-normalization direction d_t
  double cosine_g_m = 0.0;     // cos(g_t, m_t) after this step's EMA update
  long extra_grad_evals = 0;   // gradient-eval examples beyond the base update
};

struct StepResult {
  ParamVector params;
  StepReport report;
};

// constant -> gamma0; cosine -> gamma0*(1+cos(pi*t/T))/2; inv-sqrt-total -> gamma0/sqrt(T).
double lr_at(const OptimizerConfig& config, long t, long T_total);

// constant -> rho; inv-sqrt-step -> rho/sqrt(t+1).
double rho_at(const OptimizerConfig& config, long t);

StepResult step_sgd(const model::ModelSpec& spec, const ParamVector& params,
                    const Batch& batch, const OptimizerConfig& config,
                    OptimizerState& state, double lr);

StepResult step_sam(const model::ModelSpec& spec, const ParamVector& params,
                    const Batch& batch, const OptimizerConfig& config,
                    OptimizerState& state, double lr, double rho);

StepResult step_fsam(const model::ModelSpec& spec, const ParamVector& params,
                     const Batch& batch, const OptimizerConfig& config,
                     OptimizerState& state, double lr, double rho);

StepResult step_asam(const model::ModelSpec& spec, const ParamVector& params,
                     const Batch& batch, const OptimizerConfig& config,
                     OptimizerState& state, double lr, double rho);

StepResult step_fasam(const model::ModelSpec& spec, const ParamVector& params,
                      const Batch& batch, const OptimizerConfig& config,
                      OptimizerState& state, double lr, double rho);

StepResult step_sam_full(const model::ModelSpec& spec, const ParamVector& params,
                         const Batch& batch, const Dataset& dataset,
                         const OptimizerConfig& config, OptimizerState& state,
                         double lr, double rho);

StepResult step_sam_db(const model::ModelSpec& spec, const ParamVector& params,
                       const Batch& batch, const Dataset& dataset,
                       const OptimizerConfig& config, OptimizerState& state,
                       double lr, double rho);

StepResult step_sam_noise(const model::ModelSpec& spec, const ParamVector& params,
                          const Batch& batch, const Dataset& dataset,
                          const OptimizerConfig& config, OptimizerState& state,
                          double lr, double rho);

StepResult step_sam_strength(const model::ModelSpec& spec, const ParamVector& params,
                             const Batch& inner, const Batch& outer,
                             const OptimizerConfig& config, OptimizerState& state,
                             double lr, double rho);

}  // namespace sharpkit::optim
