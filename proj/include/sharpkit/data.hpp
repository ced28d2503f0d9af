#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "sharpkit/common.hpp"
#include "sharpkit/dataset.hpp"

// Dataset construction (synthetic generators + IDX ingestion), label-noise
// injection, and minibatch sampling including the nested-batch protocol.

namespace sharpkit::data {

// Balanced classes around means placed on a sphere of radius `spread`,
// unit isotropic noise.
Dataset gen_gaussian_mixture(int n, int dim, int classes, double spread, std::uint64_t seed);

// Two interleaved unit half-circles centered at (0,0) and (1,0.5), labels {0,1}.
Dataset gen_two_moons(int n, double noise, std::uint64_t seed);

// y = X w* + noise * N(0,1); w* is recorded in the dataset's true_w.
Dataset gen_linear_regression(int n, int dim, double noise, std::uint64_t seed);

// Deterministic regression set whose mse loss is the exact quadratic
// sum_i h_i/2 * w_i^2 + 1/2 * b^2, i.e. Hessian diag(h_1..h_d, 1).
Dataset gen_axis_quadratic(const std::vector<double>& h);

// Big-endian IDX pair (image magic 0x00000803, label magic 0x00000801);
// pixels scaled to [0,1].
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

// Each label independently flips, with probability `rate`, to a uniform
// draw over the other class_count-1 classes.
Dataset inject_label_noise(const Dataset& dataset, double rate, std::uint64_t seed);

// Deterministic prefix split after a seeded shuffle.
std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double train_ratio,
                                          std::uint64_t seed);

enum class SamplerMode { WithReplacement, EpochShuffle };

// Single-owner mutable sampling state; the index stream is deterministic
// per seed.
struct SamplerState {
  std::mt19937_64 rng;
  SamplerMode mode = SamplerMode::EpochShuffle;
  int n = 0;
  std::vector<int> permutation;
  std::size_t cursor = 0;

  SamplerState() = default;
  SamplerState(int n_, SamplerMode mode_, std::uint64_t seed);
};

BatchIndices sample_batch(SamplerState& sampler, int b);

struct NestedBatch {
  BatchIndices outer;  // size k*b, drawn without replacement
  BatchIndices inner;  // size b, uniform subset of outer
};

// k == 1 delegates to sample_batch so the strength-1 stream matches the
// plain stream exactly.
NestedBatch sample_nested(SamplerState& sampler, int b, int k);

// Enumerability hook: visits every size-b subset of [0,n) in lexicographic
// order. Guarded to C(n,b) <= 10^6.
void for_each_combination(int n, int b, const std::function<void(const BatchIndices&)>& fn);

// C(n,b) with overflow saturation at 2^62.
unsigned long long combination_count(int n, int b);

}  // namespace sharpkit::data
