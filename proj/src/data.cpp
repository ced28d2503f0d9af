#include "sharpkit/data.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>

namespace sharpkit::data {

namespace {

constexpr double kPi = 3.14159265358979323846;

std::vector<ParamVector> sphere_means(int classes, int dim, double spread,
                                      std::mt19937_64& rng) {
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<ParamVector> means(classes, ParamVector(dim, 0.0));
  for (auto& m : means) {
    double n2 = 0.0;
    do {
      n2 = 0.0;
      for (double& x : m) {
        x = gauss(rng);
        n2 += x * x;
      }
    } while (n2 < 1e-16);
    const double scale = spread / std::sqrt(n2);
    for (double& x : m) x *= scale;
  }
  return means;
}

std::uint32_t read_be_u32(std::istream& in, const std::string& path) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) throw IoError("truncated IDX file: " + path);
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

}  // namespace

Dataset gen_gaussian_mixture(int n, int dim, int classes, double spread,
                             std::uint64_t seed) {
  if (classes < 2) throw ConfigError("gaussian mixture needs at least 2 classes");
  if (n < 1 || dim < 1) throw ConfigError("gaussian mixture needs n >= 1, dim >= 1");
  std::mt19937_64 rng(seed);
  const auto means = sphere_means(classes, dim, spread, rng);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Dataset ds;
  ds.features = Matrix(n, dim);
  ds.labels.resize(n);
  ds.class_count = classes;
  for (int i = 0; i < n; ++i) {
    const int c = i % classes;  // balanced within +-1
    ds.labels[i] = c;
    for (int j = 0; j < dim; ++j) {
      ds.features.at(i, j) = means[c][j] + gauss(rng);
    }
  }
  return ds;
}

Dataset gen_two_moons(int n, double noise, std::uint64_t seed) {
  if (n < 2) throw ConfigError("two moons needs n >= 2");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> angle(0.0, kPi);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Dataset ds;
  ds.features = Matrix(n, 2);
  ds.labels.resize(n);
  ds.class_count = 2;
  const int n0 = n - n / 2;  // class 0 takes the extra point for odd n
  for (int i = 0; i < n; ++i) {
    const double t = angle(rng);
    double x, y;
    if (i < n0) {
      x = std::cos(t);
      y = std::sin(t);
      ds.labels[i] = 0;
    } else {
      x = 1.0 - std::cos(t);
      y = 0.5 - std::sin(t);
      ds.labels[i] = 1;
    }
    if (noise > 0.0) {
      x += noise * gauss(rng);
      y += noise * gauss(rng);
    }
    ds.features.at(i, 0) = x;
    ds.features.at(i, 1) = y;
  }
  return ds;
}

Dataset gen_linear_regression(int n, int dim, double noise, std::uint64_t seed) {
  if (n < 2) throw ConfigError("linear regression set needs n >= 2");
  if (dim < 1) throw ConfigError("linear regression set needs dim >= 1");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);
  Dataset ds;
  ds.features = Matrix(n, dim);
  ds.targets = Matrix(n, 1);
  ds.class_count = 0;
  ds.true_w.resize(dim);
  for (double& w : ds.true_w) w = gauss(rng);
  for (int i = 0; i < n; ++i) {
    double y = 0.0;
    for (int j = 0; j < dim; ++j) {
      const double x = gauss(rng);
      ds.features.at(i, j) = x;
      y += x * ds.true_w[j];
    }
    if (noise > 0.0) y += noise * gauss(rng);
    ds.targets.at(i, 0) = y;
  }
  return ds;
}

Dataset gen_axis_quadratic(const std::vector<double>& h) {
  const int d = static_cast<int>(h.size());
  if (d < 1) throw ConfigError("axis quadratic needs at least one curvature value");
  for (double v : h) {
    if (v <= 0.0) throw ConfigError("axis quadratic curvatures must be positive");
  }
  Dataset ds;
  ds.features = Matrix(2 * d, d);
  ds.targets = Matrix(2 * d, 1);
  ds.class_count = 0;
  for (int i = 0; i < d; ++i) {
    const double a = std::sqrt(static_cast<double>(d) * h[i]);
    ds.features.at(2 * i, i) = a;
    ds.features.at(2 * i + 1, i) = -a;
  }
  return ds;
}

Dataset load_idx(const std::string& images_path, const std::string& labels_path) {
  std::ifstream img(images_path, std::ios::binary);
  if (!img) throw IoError("cannot open " + images_path);
  std::ifstream lab(labels_path, std::ios::binary);
  if (!lab) throw IoError("cannot open " + labels_path);

  const std::uint32_t img_magic = read_be_u32(img, images_path);
  if (img_magic != 0x00000803u) {
    throw FormatError("bad image magic in " + images_path);
  }
  const std::uint32_t count = read_be_u32(img, images_path);
  const std::uint32_t rows = read_be_u32(img, images_path);
  const std::uint32_t cols = read_be_u32(img, images_path);

  const std::uint32_t lab_magic = read_be_u32(lab, labels_path);
  if (lab_magic != 0x00000801u) {
    throw FormatError("bad label magic in " + labels_path);
  }
  const std::uint32_t lab_count = read_be_u32(lab, labels_path);
  if (lab_count != count) {
    throw ConsistencyError("IDX count mismatch: " + std::to_string(count) +
                           " images vs " + std::to_string(lab_count) + " labels");
  }

  const std::size_t dim = static_cast<std::size_t>(rows) * cols;
  std::vector<unsigned char> pixels(static_cast<std::size_t>(count) * dim);
  img.read(reinterpret_cast<char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
  if (static_cast<std::size_t>(img.gcount()) != pixels.size()) {
    throw IoError("truncated IDX file: " + images_path);
  }
  std::vector<unsigned char> raw_labels(count);
  lab.read(reinterpret_cast<char*>(raw_labels.data()), static_cast<std::streamsize>(count));
  if (static_cast<std::size_t>(lab.gcount()) != raw_labels.size()) {
    throw IoError("truncated IDX file: " + labels_path);
  }

  Dataset ds;
  ds.features = Matrix(static_cast<int>(count), static_cast<int>(dim));
  ds.labels.resize(count);
  int max_label = 0;
  for (std::uint32_t i = 0; i < count; ++i) {
    ds.labels[i] = raw_labels[i];
    max_label = std::max(max_label, ds.labels[i]);
    for (std::size_t j = 0; j < dim; ++j) {
      ds.features.at(static_cast<int>(i), static_cast<int>(j)) =
          pixels[i * dim + j] / 255.0;
    }
  }
  ds.class_count = max_label + 1;
  return ds;
}

Dataset inject_label_noise(const Dataset& dataset, double rate, std::uint64_t seed) {
  if (!dataset.is_classification() || dataset.class_count < 2) {
    throw DomainError("label noise requires a classification dataset with >= 2 classes");
  }
  if (rate < 0.0 || rate > 1.0) throw DomainError("noise rate must be in [0,1]");
  Dataset out = dataset;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  std::uniform_int_distribution<int> other(0, dataset.class_count - 2);
  for (int& label : out.labels) {
    if (coin(rng) < rate) {
      int k = other(rng);
      if (k >= label) ++k;  // uniform over the other classes
      label = k;
    }
  }
  return out;
}

std::pair<Dataset, Dataset> split_dataset(const Dataset& ds, double train_ratio,
                                          std::uint64_t seed) {
  if (train_ratio <= 0.0 || train_ratio > 1.0) {
    throw ConfigError("split ratio must be in (0,1]");
  }
  const int n = ds.size();
  std::vector<int> perm(n);
  std::iota(perm.begin(), perm.end(), 0);
  std::mt19937_64 rng(seed);
  std::shuffle(perm.begin(), perm.end(), rng);
  const int n_train = std::max(1, static_cast<int>(train_ratio * n));

  auto take = [&](int from, int to) {
    Dataset part;
    part.class_count = ds.class_count;
    part.true_w = ds.true_w;
    part.features = Matrix(to - from, ds.features.cols);
    if (!ds.labels.empty()) part.labels.resize(to - from);
    if (!ds.targets.empty()) part.targets = Matrix(to - from, ds.targets.cols);
    for (int i = from; i < to; ++i) {
      const int src = perm[i];
      for (int j = 0; j < ds.features.cols; ++j) {
        part.features.at(i - from, j) = ds.features.at(src, j);
      }
      if (!ds.labels.empty()) part.labels[i - from] = ds.labels[src];
      if (!ds.targets.empty()) {
        for (int j = 0; j < ds.targets.cols; ++j) {
          part.targets.at(i - from, j) = ds.targets.at(src, j);
        }
      }
    }
    return part;
  };

  return {take(0, n_train), n_train < n ? take(n_train, n) : Dataset{}};
}

SamplerState::SamplerState(int n_, SamplerMode mode_, std::uint64_t seed)
    : rng(seed), mode(mode_), n(n_) {
  if (n_ < 1) throw ConfigError("sampler needs a non-empty dataset");
}

BatchIndices sample_batch(SamplerState& sampler, int b) {
  if (b < 1) throw ConfigError("batch size must be positive");
  BatchIndices out(b);
  if (sampler.mode == SamplerMode::WithReplacement) {
    std::uniform_int_distribution<int> pick(0, sampler.n - 1);
    for (int& idx : out) idx = pick(sampler.rng);
    return out;
  }
  if (b > sampler.n) {
    throw ConfigError("batch size exceeds dataset size in epoch-shuffle mode");
  }
  for (int i = 0; i < b; ++i) {
    if (sampler.cursor >= sampler.permutation.size()) {
      sampler.permutation.resize(sampler.n);
      std::iota(sampler.permutation.begin(), sampler.permutation.end(), 0);
      std::shuffle(sampler.permutation.begin(), sampler.permutation.end(), sampler.rng);
      sampler.cursor = 0;
    }
    out[i] = sampler.permutation[sampler.cursor++];
  }
  return out;
}

NestedBatch sample_nested(SamplerState& sampler, int b, int k) {
  if (k < 1) throw ConfigError("nested sampling needs k >= 1");
  if (b < 1) throw ConfigError("batch size must be positive");
  NestedBatch nested;
  if (k == 1) {
    nested.outer = sample_batch(sampler, b);
    nested.inner = nested.outer;
    return nested;
  }
  const long kb = static_cast<long>(k) * b;
  if (kb > sampler.n) {
    throw ConfigError("nested sampling needs k*b <= n");
  }
  // partial Fisher-Yates over [0,n) for the outer draw
  std::vector<int> pool(sampler.n);
  std::iota(pool.begin(), pool.end(), 0);
  nested.outer.resize(kb);
  for (long i = 0; i < kb; ++i) {
    std::uniform_int_distribution<long> pick(i, sampler.n - 1);
    std::swap(pool[i], pool[pick(sampler.rng)]);
    nested.outer[i] = pool[i];
  }
  // uniform size-b subset of the outer batch
  std::vector<int> inner_pool = nested.outer;
  nested.inner.resize(b);
  for (int i = 0; i < b; ++i) {
    std::uniform_int_distribution<long> pick(i, kb - 1);
    std::swap(inner_pool[i], inner_pool[pick(sampler.rng)]);
    nested.inner[i] = inner_pool[i];
  }
  return nested;
}

unsigned long long combination_count(int n, int b) {
  if (b < 0 || b > n) return 0;
  b = std::min(b, n - b);
  unsigned long long c = 1;
  for (int i = 1; i <= b; ++i) {
    const unsigned long long cap = (1ull << 62);
    c = c * (n - b + i) / i;
    if (c > cap) return cap;
  }
  return c;
}

void for_each_combination(int n, int b,
                          const std::function<void(const BatchIndices&)>& fn) {
  if (b < 1 || b > n) throw ConfigError("combination enumeration needs 1 <= b <= n");
  if (combination_count(n, b) > 1000000ull) {
    throw ConfigError("combination enumeration capped at 10^6 subsets");
  }
  BatchIndices idx(b);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    fn(idx);
    int i = b - 1;
    while (i >= 0 && idx[i] == n - b + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < b; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace sharpkit::data
