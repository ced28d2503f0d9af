#pragma once

#include <optional>
#include <string>
#include <vector>

#include "sharpkit/common.hpp"
#include "sharpkit/configfile.hpp"
#include "sharpkit/data.hpp"
#include "sharpkit/dataset.hpp"
#include "sharpkit/model.hpp"
#include "sharpkit/optim.hpp"

// Training loops, sweep orchestration, evaluation, checkpointing, and
// metrics persistence.

namespace sharpkit::harness {

inline const char* kMetricsHeader =
    "step,lr,rho,train_loss,perturbed_loss,grad_norm,d_norm,perturb_norm,"
    "cosine_g_m,phi,test_loss,test_acc";

inline const char* kCheckpointMagic = "SHARPKIT-CKPT";
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct EvalResult {
  double loss = 0.0;
  std::optional<double> accuracy;  // absent for regression
};

// Mean loss plus argmax accuracy (ties resolved toward the lowest class).
EvalResult evaluate(const model::ModelSpec& spec, const ParamVector& params,
                    const Dataset& dataset);

struct RunRecord {
  std::string status;  // "ok" or "diverged"
  long divergence_step = -1;
  std::uint64_t seed = 0;
  std::string config_text;
  double wall_time_ms = 0.0;
  double final_train_loss = 0.0;
  std::optional<double> final_train_acc;
  std::optional<double> final_test_loss;
  std::optional<double> final_test_acc;
  long grad_eval_examples = 0;
  long steps_run = 0;
  std::string metrics_csv;
  std::string checkpoint;
  std::string manifest;
  std::string out_dir;
};

struct CheckpointData {
  std::string config_text;
  long step = 0;
  ParamVector params;
  numkit::EmaState ema;
  ParamVector momentum_buffer;
  std::string optimizer_rng;   // text-serialized engine state
  data::SamplerMode sampler_mode = data::SamplerMode::EpochShuffle;
  int sampler_n = 0;
  std::size_t sampler_cursor = 0;
  std::vector<int> sampler_permutation;
  std::string sampler_rng;
};

void checkpoint_save(const std::string& path, const CheckpointData& data);
CheckpointData checkpoint_load(const std::string& path);

// Dataset construction per the config's data section (before splitting).
Dataset build_dataset(const config::ExperimentConfig& config);

// Train split (with label noise applied) and test split.
std::pair<Dataset, Dataset> build_splits(const config::ExperimentConfig& config);

// Executes the configured run; writes metrics.csv, manifest.json and a
// final checkpoint under config.run.out. Returns a failure record (status
// "diverged") instead of throwing when the loss diverges.
RunRecord train(const config::ExperimentConfig& config);

enum class SweepAxis { Rho, BatchSize, NoiseRate, StrengthK, Gamma };

SweepAxis sweep_axis_from_name(const std::string& name);
std::string sweep_axis_name(SweepAxis axis);

struct SweepResult {
  std::vector<RunRecord> records;
  std::string summary_json;
  std::string summary_svg;
};

// Cartesian product of values x seeds; each run is independent and lands in
// its own subdirectory of out_dir. workers <= 0 picks the hardware count.
SweepResult sweep(const config::ExperimentConfig& base, SweepAxis axis,
                  const std::vector<double>& values, const std::vector<std::uint64_t>& seeds,
                  const std::string& out_dir, int workers = 0);

void write_text_atomic(const std::string& path, const std::string& content);

}  // namespace sharpkit::harness
