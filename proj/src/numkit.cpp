#include "sharpkit/numkit.hpp"

#include <algorithm>
#include <cmath>

namespace sharpkit::numkit {

double cosine_similarity(const ParamVector& a, const ParamVector& b) {
  check_same_length(a, b, "cosine_similarity");
  const double na = norm2(a);
  const double nb = norm2(b);
  if (na < kZeroTol || nb < kZeroTol) return 0.0;
  const double c = dot(a, b) / (na * nb);
  return std::clamp(c, -1.0, 1.0);
}

Decomposition decompose_paper(const ParamVector& g_full, const ParamVector& g_batch) {
  check_same_length(g_full, g_batch, "decompose_paper");
  Decomposition d;
  d.cosine = cosine_similarity(g_full, g_batch);
  if (norm2(g_full) < kZeroTol) {
    d.full_component.assign(g_full.size(), 0.0);
    d.noise_component = g_batch;
    return d;
  }
  d.full_component = scaled(g_full, d.cosine);
  d.noise_component = subtracted(g_batch, d.full_component);
  return d;
}

Decomposition decompose_orthogonal(const ParamVector& g_full, const ParamVector& g_batch) {
  check_same_length(g_full, g_batch, "decompose_orthogonal");
  Decomposition d;
  d.cosine = cosine_similarity(g_full, g_batch);
  const double nf = norm2(g_full);
  if (nf < kZeroTol) {
    d.full_component.assign(g_full.size(), 0.0);
    d.noise_component = g_batch;
    return d;
  }
  const double coeff = dot(g_batch, g_full) / (nf * nf);
  d.full_component = scaled(g_full, coeff);
  d.noise_component = subtracted(g_batch, d.full_component);
  return d;
}

EmaState ema_update(const EmaState& state, const ParamVector& g) {
  check_same_length(state.m, g, "ema_update");
  EmaState next = state;
  for (std::size_t i = 0; i < g.size(); ++i) {
    next.m[i] = state.lambda * state.m[i] + (1.0 - state.lambda) * g[i];
  }
  next.steps_seen = state.steps_seen + 1;
  return next;
}

ParamVector perturbation(const ParamVector& d, double rho) {
  if (rho < 0.0) throw DomainError("perturbation: rho must be non-negative");
  const double n = norm2(d);
  if (rho == 0.0 || n < kZeroTol) return ParamVector(d.size(), 0.0);
  return scaled(d, rho / n);
}

double lambda_from_gamma(double gamma, double C) {
  if (gamma <= 0.0) throw DomainError("lambda_from_gamma: gamma must be positive");
  if (C <= 0.0) throw DomainError("lambda_from_gamma: C must be positive");
  return std::clamp(1.0 - C * std::pow(gamma, 2.0 / 3.0), 0.0, 1.0);
}

}  // namespace sharpkit::numkit
