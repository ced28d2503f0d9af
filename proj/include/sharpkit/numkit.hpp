#pragma once

#include "sharpkit/common.hpp"
#include "sharpkit/vec.hpp"

// Dense-vector primitives: the stochastic-gradient decomposition, EMA
// tracking of the full gradient, and perturbation normalization.

namespace sharpkit::numkit {

// EMA of minibatch gradients, m_t = lambda * m_{t-1} + (1 - lambda) * g_t.
// Initialized from zero; no bias correction.
struct EmaState {
  ParamVector m;
  double lambda = 0.9;
  long steps_seen = 0;

  EmaState() = default;
  EmaState(std::size_t dim, double lambda_) : m(dim, 0.0), lambda(lambda_) {}
};

// Split of a minibatch gradient into the component along the full gradient
// direction and the batch-specific residual. full + noise == g_batch.
struct Decomposition {
  ParamVector full_component;
  ParamVector noise_component;
  double cosine = 0.0;
};

// <a,b> / (|a||b|), clamped to [-1,1]; 0 when either norm is below kZeroTol.
double cosine_similarity(const ParamVector& a, const ParamVector& b);

// Cosine-scaled split: full = cos(g_full, g_batch) * g_full,
// noise = g_batch - full. Orthogonal to g_full only when |g_batch| == |g_full|.
Decomposition decompose_paper(const ParamVector& g_full, const ParamVector& g_batch);

// Standard orthogonal projection <g_batch,g_full>/|g_full|^2 * g_full;
// the noise component is exactly orthogonal to g_full.
Decomposition decompose_orthogonal(const ParamVector& g_full, const ParamVector& g_batch);

// Returns the updated state; the input is untouched.
EmaState ema_update(const EmaState& state, const ParamVector& g);

// rho * d / |d|; zero vector when rho == 0 or |d| < kZeroTol.
ParamVector perturbation(const ParamVector& d, double rho);

// clamp(1 - C * gamma^(2/3), 0, 1). gamma must be positive.
double lambda_from_gamma(double gamma, double C);

}  // namespace sharpkit::numkit
