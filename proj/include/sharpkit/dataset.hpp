#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

#include "sharpkit/common.hpp"

namespace sharpkit {

// Dense row-major matrix.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), values(static_cast<std::size_t>(r) * c, 0.0) {}

  double& at(int r, int c) { return values[static_cast<std::size_t>(r) * cols + c]; }
  double at(int r, int c) const { return values[static_cast<std::size_t>(r) * cols + c]; }
  const double* row(int r) const { return values.data() + static_cast<std::size_t>(r) * cols; }
  bool empty() const { return rows == 0 || cols == 0; }
};

// Feature matrix plus either integer class ids (classification) or a real
// target matrix (regression, class_count == 0).
struct Dataset {
  Matrix features;            // n x dim
  std::vector<int> labels;    // n class ids, empty for regression
  Matrix targets;             // n x m real targets, empty for classification
  int class_count = 0;        // 0 for regression
  ParamVector true_w;         // generator ground truth when known (regression)

  int size() const { return features.rows; }
  int dim() const { return features.cols; }
  bool is_classification() const { return class_count > 0; }
};

// Minibatch: a dataset reference plus the indices that select it.
struct Batch {
  const Dataset* data = nullptr;
  std::vector<int> indices;

  static Batch whole(const Dataset& ds) {
    Batch b;
    b.data = &ds;
    b.indices.resize(static_cast<std::size_t>(ds.size()));
    std::iota(b.indices.begin(), b.indices.end(), 0);
    return b;
  }

  int size() const { return static_cast<int>(indices.size()); }
};

using BatchIndices = std::vector<int>;

}  // namespace sharpkit
