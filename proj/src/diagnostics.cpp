#include "sharpkit/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "sharpkit/data.hpp"
#include "sharpkit/vec.hpp"

namespace sharpkit::diagnostics {

double EstimationTrace::tail_mean(double fraction) const {
  if (phi.empty()) return 0.0;
  const std::size_t count = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::ceil(fraction * phi.size())));
  double s = 0.0;
  for (std::size_t i = phi.size() - count; i < phi.size(); ++i) s += phi[i];
  return s / count;
}

double ema_error(const numkit::EmaState& ema, const model::ModelSpec& spec,
                 const ParamVector& params, const Dataset& dataset) {
  const ParamVector gf = model::full_grad(spec, params, dataset);
  return norm2(subtracted(ema.m, gf));
}

OrthogonalityStat orthogonality_stat(const model::ModelSpec& spec, const ParamVector& params,
                                     const Dataset& dataset, int b, OrthogonalityMode mode,
                                     long trials, std::uint64_t seed) {
  const ParamVector gf = model::full_grad(spec, params, dataset);
  OrthogonalityStat stat;
  double sum = 0.0;
  double sumsq = 0.0;
  auto visit = [&](const BatchIndices& idx) {
    Batch batch;
    batch.data = &dataset;
    batch.indices = idx;
    const ParamVector gb = model::grad(spec, params, batch).grad;
    const double inner = dot(subtracted(gb, gf), gf);
    sum += inner;
    sumsq += inner * inner;
    stat.count += 1;
  };

  if (mode == OrthogonalityMode::Enumerate) {
    data::for_each_combination(dataset.size(), b, visit);
  } else {
    if (trials < 1) throw ConfigError("orthogonality_stat: sample mode needs trials >= 1");
    std::mt19937_64 rng(seed);
    std::vector<int> pool(dataset.size());
    for (long t = 0; t < trials; ++t) {
      std::iota(pool.begin(), pool.end(), 0);
      BatchIndices idx(b);
      for (int i = 0; i < b; ++i) {
        std::uniform_int_distribution<int> pick(i, dataset.size() - 1);
        std::swap(pool[i], pool[pick(rng)]);
        idx[i] = pool[i];
      }
      visit(idx);
    }
  }

  stat.mean_inner = sum / stat.count;
  if (stat.count > 1) {
    const double var =
        std::max(0.0, (sumsq - sum * sum / stat.count) / (stat.count - 1));
    stat.stderr_inner = std::sqrt(var / stat.count);
  }
  return stat;
}

double friendly_objective(const model::ModelSpec& spec, const ParamVector& params,
                          const ParamVector& eps, const Batch& batch,
                          const Dataset& dataset, double sigma) {
  ParamVector shifted = added(params, eps);
  const double batch_loss = model::loss(spec, shifted, batch);
  const double full_loss = model::loss(spec, shifted, Batch::whole(dataset));
  return batch_loss - sigma * full_loss;
}

namespace {

double gap_from_direction(const model::ModelSpec& spec, const ParamVector& params,
                          const Batch& batch, const ParamVector& direction, double rho) {
  const ParamVector eps = numkit::perturbation(direction, rho);
  const double base = model::loss(spec, params, batch);
  const double shifted = model::loss(spec, added(params, eps), batch);
  return shifted - base;
}

}  // namespace

double sharpness_gap(const model::ModelSpec& spec, const ParamVector& params,
                     const Batch& batch, double rho) {
  const ParamVector g = model::grad(spec, params, batch).grad;
  return gap_from_direction(spec, params, batch, g, rho);
}

double sharpness_gap(const model::ModelSpec& spec, const ParamVector& params,
                     const Dataset& dataset, double rho) {
  const Batch whole = Batch::whole(dataset);
  const ParamVector g = model::full_grad(spec, params, dataset);
  return gap_from_direction(spec, params, whole, g, rho);
}

std::vector<double> symmetric_eigenvalues(std::vector<double> a, int n) {
  // Cyclic Jacobi; plenty for the small tridiagonal matrices Lanczos builds.
  auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
  for (int sweep = 0; sweep < 64; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
    }
    if (off < 1e-28) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(at(p, q)) < 1e-300) continue;
        const double theta = (at(q, q) - at(p, p)) / (2.0 * at(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (int i = 0; i < n; ++i) {
          const double aip = at(i, p);
          const double aiq = at(i, q);
          at(i, p) = c * aip - s * aiq;
          at(i, q) = s * aip + c * aiq;
        }
        for (int i = 0; i < n; ++i) {
          const double api = at(p, i);
          const double aqi = at(q, i);
          at(p, i) = c * api - s * aqi;
          at(q, i) = s * api + c * aqi;
        }
      }
    }
  }
  std::vector<double> eig(n);
  for (int i = 0; i < n; ++i) eig[i] = at(i, i);
  std::sort(eig.begin(), eig.end(), std::greater<>());
  return eig;
}

SpectrumReport lanczos_spectrum(const model::ModelSpec& spec, const ParamVector& params,
                                const Dataset& dataset, int k, int iters,
                                std::uint64_t seed) {
  const int dim = static_cast<int>(params.size());
  if (k < 1) throw ConfigError("lanczos: k must be >= 1");
  if (iters < k) throw ConfigError("lanczos: iters must be >= k");
  if (dim < k) throw ConfigError("lanczos: parameter dimension must be >= k");

  const Batch whole = Batch::whole(dataset);
  const double h = model::default_hvp_step(params);
  auto apply = [&](const ParamVector& v) { return model::hvp(spec, params, whole, v, h); };

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<ParamVector> basis;
  std::vector<double> alpha;
  std::vector<double> beta;  // beta[j] couples step j to j+1; 0 across restarts

  // Fresh unit vector orthogonal to the stored basis. Returns false once the
  // basis spans the whole space.
  auto fresh_direction = [&](ParamVector& v) {
    for (int attempt = 0; attempt < 8; ++attempt) {
      for (double& x : v) x = gauss(rng);
      for (const ParamVector& u : basis) axpy(-dot(v, u), u, v);
      const double n = norm2(v);
      if (n > 1e-8) {
        for (double& x : v) x /= n;
        return true;
      }
    }
    return false;
  };

  SpectrumReport report;
  ParamVector v(dim);
  if (!fresh_direction(v)) throw ConfigError("lanczos: degenerate start");
  basis.push_back(v);

  const int max_steps = std::min(iters, dim);
  double alpha_scale = 0.0;
  bool block_start = true;  // no beta coupling into the first vector of a block
  for (int j = 0; j < max_steps; ++j) {
    ParamVector w = apply(basis[j]);
    const double a = dot(w, basis[j]);
    alpha.push_back(a);
    alpha_scale = std::max(alpha_scale, std::abs(a));
    axpy(-a, basis[j], w);
    if (j > 0 && !block_start) axpy(-beta[j - 1], basis[j - 1], w);
    // full reorthogonalization against the stored basis
    for (const ParamVector& u : basis) axpy(-dot(w, u), u, w);
    block_start = false;
    if (j + 1 == max_steps) break;
    const double b = norm2(w);
    // An invariant subspace was found (or only finite-difference noise is
    // left): restart in the orthogonal complement so repeated eigenvalues
    // still surface. The tridiagonal block-decouples via a zero coupling.
    if (b < std::max(kZeroTol, 1e-10 * std::max(1.0, alpha_scale))) {
      report.breakdown = true;
      ParamVector restart(dim);
      if (!fresh_direction(restart)) break;
      beta.push_back(0.0);
      basis.push_back(std::move(restart));
      block_start = true;
      continue;
    }
    beta.push_back(b);
    for (double& x : w) x /= b;
    basis.push_back(std::move(w));
  }
  if (max_steps < iters) report.breakdown = true;

  const int m = static_cast<int>(alpha.size());
  std::vector<double> tri(static_cast<std::size_t>(m) * m, 0.0);
  for (int i = 0; i < m; ++i) {
    tri[static_cast<std::size_t>(i) * m + i] = alpha[i];
    if (i + 1 < m) {
      tri[static_cast<std::size_t>(i) * m + i + 1] = beta[i];
      tri[static_cast<std::size_t>(i + 1) * m + i] = beta[i];
    }
  }
  std::vector<double> ritz = symmetric_eigenvalues(std::move(tri), m);
  if (static_cast<int>(ritz.size()) > k) ritz.resize(k);
  report.eigenvalues = std::move(ritz);
  report.lambda1 = report.eigenvalues.empty() ? 0.0 : report.eigenvalues.front();
  if (report.eigenvalues.size() >= 5) {
    report.ratio_1_5 = report.lambda1 / report.eigenvalues[4];
  }
  return report;
}

}  // namespace sharpkit::diagnostics
