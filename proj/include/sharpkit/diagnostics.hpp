#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "sharpkit/common.hpp"
#include "sharpkit/dataset.hpp"
#include "sharpkit/model.hpp"
#include "sharpkit/numkit.hpp"

// Empirical verification surface: EMA estimation error, expectation
// orthogonality of the noise component, the friendly bi-level objective,
// one-ascent-step sharpness, and the Hessian spectrum via Lanczos.

namespace sharpkit::diagnostics {

struct SpectrumReport {
  std::vector<double> eigenvalues;  // Ritz values, descending
  double lambda1 = 0.0;
  std::optional<double> ratio_1_5;  // lambda1/lambda5 when >= 5 values
  bool breakdown = false;           // basis exhausted before `iters` steps
};

// Per-step estimation error Phi_t = |m_t - grad L(w_t)| along a run.
struct EstimationTrace {
  std::vector<long> steps;
  std::vector<double> phi;
  double gamma = 0.0;
  double lambda = 0.0;

  // Mean of the last ceil(fraction * size) entries.
  double tail_mean(double fraction) const;
};

// |m - full_grad(dataset)|_2.
double ema_error(const numkit::EmaState& ema, const model::ModelSpec& spec,
                 const ParamVector& params, const Dataset& dataset);

enum class OrthogonalityMode { Enumerate, Sample };

struct OrthogonalityStat {
  double mean_inner = 0.0;
  double stderr_inner = 0.0;
  long count = 0;
};

// Mean over minibatches of <grad L_B(w) - grad L(w), grad L(w)>. Enumerate
// mode averages over all C(n,b) subsets (capped at 10^6), sample mode over
// `trials` uniform subsets.
OrthogonalityStat orthogonality_stat(const model::ModelSpec& spec, const ParamVector& params,
                                     const Dataset& dataset, int b, OrthogonalityMode mode,
                                     long trials = 0, std::uint64_t seed = 0);

// L_B(w + eps) - sigma * L_D(w + eps).
double friendly_objective(const model::ModelSpec& spec, const ParamVector& params,
                          const ParamVector& eps, const Batch& batch,
                          const Dataset& dataset, double sigma);

// One-ascent-step sharpness estimate: loss(w + rho*norm(g)) - loss(w).
// First-order, so non-negativity is not guaranteed.
double sharpness_gap(const model::ModelSpec& spec, const ParamVector& params,
                     const Batch& batch, double rho);
double sharpness_gap(const model::ModelSpec& spec, const ParamVector& params,
                     const Dataset& dataset, double rho);

// Lanczos with full reorthogonalization on the finite-difference HVP over
// the full-dataset loss; returns the top-k Ritz values.
SpectrumReport lanczos_spectrum(const model::ModelSpec& spec, const ParamVector& params,
                                const Dataset& dataset, int k, int iters,
                                std::uint64_t seed);

// Eigenvalues of a dense symmetric matrix (cyclic Jacobi), descending.
// Exposed for oracle tests on small matrices.
std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n);

}  // namespace sharpkit::diagnostics
