#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "sharpkit/data.hpp"
#include "sharpkit/dataset.hpp"
#include "sharpkit/model.hpp"
#include "sharpkit/vec.hpp"

// Shared oracles and fixtures. Everything here is independent of the
// implementation paths it is used to check.

namespace testutil {

using sharpkit::Batch;
using sharpkit::Dataset;
using sharpkit::ParamVector;

inline ParamVector random_vector(std::mt19937_64& rng, std::size_t n, double scale = 1.0) {
  std::normal_distribution<double> gauss(0.0, scale);
  ParamVector v(n);
  for (double& x : v) x = gauss(rng);
  return v;
}

// Central finite-difference gradient of the batch loss.
inline ParamVector fd_gradient(const sharpkit::model::ModelSpec& spec, const ParamVector& params,
                               const Batch& batch, double h = 1e-5) {
  ParamVector g(params.size());
  ParamVector w = params;
  for (std::size_t i = 0; i < params.size(); ++i) {
    w[i] = params[i] + h;
    const double up = sharpkit::model::loss(spec, w, batch);
    w[i] = params[i] - h;
    const double down = sharpkit::model::loss(spec, w, batch);
    w[i] = params[i];
    g[i] = (up - down) / (2.0 * h);
  }
  return g;
}

// Solves A x = b by Gaussian elimination with partial pivoting (small systems).
inline std::vector<double> solve_linear(std::vector<std::vector<double>> A,
                                        std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::abs(A[r][col]) > std::abs(A[pivot][col])) pivot = r;
    }
    std::swap(A[col], A[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t r = col + 1; r < n; ++r) {
      const double f = A[r][col] / A[col][col];
      for (std::size_t c = col; c < n; ++c) A[r][c] -= f * A[col][c];
      b[r] -= f * b[col];
    }
  }
  std::vector<double> x(n);
  for (std::size_t i = n; i-- > 0;) {
    double s = b[i];
    for (std::size_t c = i + 1; c < n; ++c) s -= A[i][c] * x[c];
    x[i] = s / A[i][i];
  }
  return x;
}

// Least-squares fit (weights + intercept) by the normal equations.
inline std::vector<double> normal_equations_fit(const Dataset& ds) {
  const int d = ds.dim();
  const int n = ds.size();
  const int m = d + 1;
  std::vector<std::vector<double>> A(m, std::vector<double>(m, 0.0));
  std::vector<double> b(m, 0.0);
  for (int i = 0; i < n; ++i) {
    std::vector<double> x(ds.features.row(i), ds.features.row(i) + d);
    x.push_back(1.0);
    for (int r = 0; r < m; ++r) {
      for (int c = 0; c < m; ++c) A[r][c] += x[r] * x[c];
      b[r] += x[r] * ds.targets.at(i, 0);
    }
  }
  return solve_linear(std::move(A), std::move(b));
}

// Linear-regression model whose loss is exactly
// sum_i h_i/2 w_i^2 + 1/2 b^2 (Hessian diag(h..., 1)).
struct QuadraticFixture {
  sharpkit::model::ModelSpec spec;
  Dataset dataset;

  explicit QuadraticFixture(const std::vector<double>& h) {
    spec.kind = sharpkit::model::ModelKind::LinearRegression;
    spec.layer_sizes = {static_cast<int>(h.size()), 1};
    spec.loss = sharpkit::model::LossKind::Mse;
    dataset = sharpkit::data::gen_axis_quadratic(h);
  }

  Batch whole() const { return Batch::whole(dataset); }
};

inline double max_abs_diff(const ParamVector& a, const ParamVector& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace testutil
