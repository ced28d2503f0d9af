#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "sharpkit/common.hpp"
#include "sharpkit/data.hpp"
#include "sharpkit/model.hpp"
#include "sharpkit/optim.hpp"

// Flat, sectioned key=value experiment configs. Sections: model, data,
// optimizer, run. Unknown sections or keys are hard errors; overrides
// (section.key=value) apply after file parsing.

namespace sharpkit::config {

using ConfigMap = std::map<std::string, std::map<std::string, std::string>>;

ConfigMap parse_config_text(const std::string& text);
ConfigMap load_config_file(const std::string& path);

// "section.key=value"
void apply_override(ConfigMap& map, const std::string& assignment);

enum class DataSource { GaussianMixture, TwoMoons, LinearRegression, AxisQuadratic, Idx };

struct DataConfig {
  DataSource source = DataSource::GaussianMixture;
  int n = 512;
  int dim = 2;
  int classes = 2;
  double spread = 2.0;
  double gen_noise = 0.1;    // generator noise (two-moons / regression)
  double noise_rate = 0.0;   // symmetric label-flip rate on the train split
  double split = 0.8;        // train fraction
  std::string images;        // idx source
  std::string labels;
  std::vector<double> quad_h;  // axis-quadratic curvatures
};

struct RunConfig {
  long steps = 1000;
  int batch_size = 32;
  long eval_every = 100;       // 0 disables periodic eval (final eval always runs)
  std::uint64_t seed = 1;
  data::SamplerMode sampler = data::SamplerMode::EpochShuffle;
  long phi_every = 0;          // 0 disables Phi tracking (full-gradient cost)
  long decomp_every = 0;       // 0 disables decomposition logging
  int spectrum_k = 0;          // 0 disables the end-of-run spectrum
  int spectrum_iters = 0;      // 0 -> 5k
  long checkpoint_at = 0;      // mid-run checkpoint step, 0 disables
  std::string resume_from;
  std::string out = "runs/out";
};

struct ExperimentConfig {
  model::ModelSpec model;
  DataConfig data;
  optim::OptimizerConfig optimizer;
  RunConfig run;

  void validate() const;
};

ExperimentConfig experiment_from_map(const ConfigMap& map);

// Canonical full rendering; reparsing it reproduces the identical config.
std::string to_text(const ExperimentConfig& config);

// Formats a double so it parses back to the identical value.
std::string format_double(double v);

}  // namespace sharpkit::config
