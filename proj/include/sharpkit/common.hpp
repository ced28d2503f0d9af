#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace sharpkit {

// Flat view of all model parameters (and any other R^d vector: gradients,
// EMA accumulators, perturbations).
using ParamVector = std::vector<double>;

// Absolute l2-norm threshold below which a direction is treated as zero.
inline constexpr double kZeroTol = 1e-12;

// ---- error taxonomy ------------------------------------------------------
// Config/usage problems, bad file formats and I/O map to CLI exit code 1;
// numerical divergence maps to exit code 2.

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& msg) : std::invalid_argument(msg) {}
};

class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& msg) : std::invalid_argument(msg) {}
};

class FormatError : public std::runtime_error {
 public:
  explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

class ConsistencyError : public std::runtime_error {
 public:
  explicit ConsistencyError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& msg, long step)
      : std::runtime_error(msg), step_(step) {}
  long step() const { return step_; }

 private:
  long step_;
};

// ---- seed derivation -----------------------------------------------------
// One user-facing seed per run; sub-streams (data generation, init, sampler,
// optimizer rng, ...) get decorrelated seeds through splitmix64.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

enum class SeedStream : std::uint64_t {
  DataGen = 1,
  Split = 2,
  LabelNoise = 3,
  Init = 4,
  Sampler = 5,
  Optimizer = 6,
  Diagnostics = 7,
};

inline std::uint64_t derive_seed(std::uint64_t base, SeedStream stream) {
  return splitmix64(base ^ (static_cast<std::uint64_t>(stream) * 0xD6E8FEB86659FD93ull));
}

inline const char* kBuildId = "sharpkit 0.1.0";

}  // namespace sharpkit
