#include "sharpkit/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "sharpkit/diagnostics.hpp"
#include "sharpkit/svg.hpp"
#include "sharpkit/vec.hpp"

namespace sharpkit::harness {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr double kDivergenceThreshold = 1e12;

std::string fmt(double v) { return config::format_double(v); }

// ---- little-endian binary IO ----------------------------------------------

void put_u64(std::ostream& out, std::uint64_t v) {
  unsigned char buf[8];
  for (int i = 0; i < 8; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 8);
}

void put_u32(std::ostream& out, std::uint32_t v) {
  unsigned char buf[4];
  for (int i = 0; i < 4; ++i) buf[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(buf), 4);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  static_assert(sizeof(bits) == sizeof(v));
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

void put_string(std::ostream& out, const std::string& s) {
  put_u64(out, s.size());
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

void put_vector(std::ostream& out, const ParamVector& v) {
  put_u64(out, v.size());
  for (double x : v) put_f64(out, x);
}

std::uint64_t get_u64(std::istream& in, const std::string& path) {
  unsigned char buf[8];
  in.read(reinterpret_cast<char*>(buf), 8);
  if (!in) throw IoError("truncated checkpoint: " + path);
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

std::uint32_t get_u32(std::istream& in, const std::string& path) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) throw IoError("truncated checkpoint: " + path);
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | buf[i];
  return v;
}

double get_f64(std::istream& in, const std::string& path) {
  const std::uint64_t bits = get_u64(in, path);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

std::string get_string(std::istream& in, const std::string& path) {
  const std::uint64_t len = get_u64(in, path);
  std::string s(len, '\0');
  in.read(s.data(), static_cast<std::streamsize>(len));
  if (!in) throw IoError("truncated checkpoint: " + path);
  return s;
}

ParamVector get_vector(std::istream& in, const std::string& path) {
  const std::uint64_t len = get_u64(in, path);
  ParamVector v(len);
  for (auto& x : v) x = get_f64(in, path);
  return v;
}

std::string rng_to_string(const std::mt19937_64& rng) {
  std::ostringstream os;
  os << rng;
  return os.str();
}

void rng_from_string(std::mt19937_64& rng, const std::string& s) {
  std::istringstream is(s);
  is >> rng;
  if (!is) throw FormatError("cannot restore RNG state");
}

// ---- metrics rows ----------------------------------------------------------

struct MetricsRow {
  long step = 0;
  double lr = 0.0;
  double rho = 0.0;
  optim::StepReport report;
  std::optional<double> phi;
  std::optional<double> test_loss;
  std::optional<double> test_acc;

  std::string to_csv() const {
    std::ostringstream os;
    os << step << ',' << fmt(lr) << ',' << fmt(rho) << ',' << fmt(report.loss_at_w) << ','
       << fmt(report.loss_at_perturbed) << ',' << fmt(report.grad_norm) << ','
       << fmt(report.d_norm) << ',' << fmt(report.perturb_norm) << ','
       << fmt(report.cosine_g_m) << ',';
    if (phi) os << fmt(*phi);
    os << ',';
    if (test_loss) os << fmt(*test_loss);
    os << ',';
    if (test_acc) os << fmt(*test_acc);
    return os.str();
  }
};

struct StepContext {
  const model::ModelSpec* spec;
  const Dataset* train;
  const config::ExperimentConfig* cfg;
};

// Draws this step's batch (nested pair for sam-strength) and runs the
// configured variant. The descent batch is returned for diagnostics.
optim::StepResult dispatch_step(const StepContext& ctx, const ParamVector& params,
                                data::SamplerState& sampler, optim::OptimizerState& state,
                                double lr, double rho, Batch& descent_batch) {
  const auto& oc = ctx.cfg->optimizer;
  const int b = ctx.cfg->run.batch_size;
  using optim::Variant;
  if (oc.variant == Variant::SamStrength) {
    const data::NestedBatch nested = data::sample_nested(sampler, b, oc.strength_k);
    descent_batch = Batch{ctx.train, nested.inner};
    Batch outer{ctx.train, nested.outer};
    return optim::step_sam_strength(*ctx.spec, params, descent_batch, outer, oc, state, lr, rho);
  }
  descent_batch = Batch{ctx.train, data::sample_batch(sampler, b)};
  const Batch& batch = descent_batch;
  switch (oc.variant) {
    case Variant::Sgd:
      return optim::step_sgd(*ctx.spec, params, batch, oc, state, lr);
    case Variant::Sam:
      return optim::step_sam(*ctx.spec, params, batch, oc, state, lr, rho);
    case Variant::Fsam:
      return optim::step_fsam(*ctx.spec, params, batch, oc, state, lr, rho);
    case Variant::Asam:
      return optim::step_asam(*ctx.spec, params, batch, oc, state, lr, rho);
    case Variant::Fasam:
      return optim::step_fasam(*ctx.spec, params, batch, oc, state, lr, rho);
    case Variant::SamFull:
      return optim::step_sam_full(*ctx.spec, params, batch, *ctx.train, oc, state, lr, rho);
    case Variant::SamDb:
      return optim::step_sam_db(*ctx.spec, params, batch, *ctx.train, oc, state, lr, rho);
    case Variant::SamNoise:
      return optim::step_sam_noise(*ctx.spec, params, batch, *ctx.train, oc, state, lr, rho);
    case Variant::SamStrength:
      break;  // handled above
  }
  throw ConfigError("unhandled optimizer variant");
}

json record_to_json(const RunRecord& rec) {
  json j;
  j["build"] = kBuildId;
  j["status"] = rec.status;
  if (rec.divergence_step >= 0) j["divergence_step"] = rec.divergence_step;
  j["seed"] = rec.seed;
  j["config"] = rec.config_text;
  j["wall_time_ms"] = rec.wall_time_ms;
  j["steps_run"] = rec.steps_run;
  j["grad_eval_examples"] = rec.grad_eval_examples;
  json fin;
  fin["train_loss"] = rec.final_train_loss;
  if (rec.final_train_acc) fin["train_acc"] = *rec.final_train_acc;
  if (rec.final_test_loss) fin["test_loss"] = *rec.final_test_loss;
  if (rec.final_test_acc) fin["test_acc"] = *rec.final_test_acc;
  j["final"] = fin;
  json files;
  files["metrics_csv"] = rec.metrics_csv;
  files["checkpoint"] = rec.checkpoint;
  j["files"] = files;
  return j;
}

// Sections other than [run] must match between a checkpoint and the config
// it resumes under.
void check_resume_compatible(const std::string& ckpt_text, const std::string& cfg_text) {
  auto strip_run = [](const std::string& text) {
    config::ConfigMap map = config::parse_config_text(text);
    map.erase("run");
    std::ostringstream os;
    for (const auto& [sec, kv] : map) {
      os << '[' << sec << "]\n";
      for (const auto& [k, v] : kv) os << k << '=' << v << '\n';
    }
    return os.str();
  };
  if (strip_run(ckpt_text) != strip_run(cfg_text)) {
    throw ConfigError("checkpoint was produced by an incompatible config");
  }
}

}  // namespace

void write_text_atomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp);
    out << content;
  }
  fs::rename(tmp, path);
}

EvalResult evaluate(const model::ModelSpec& spec, const ParamVector& params,
                    const Dataset& dataset) {
  EvalResult result;
  result.loss = model::loss(spec, params, Batch::whole(dataset));
  if (!dataset.is_classification()) return result;

  const int out_dim = spec.output_dim();
  long correct = 0;
  for (int i = 0; i < dataset.size(); ++i) {
    const std::vector<double> logits = model::predict(spec, params, dataset, i);
    int best = 0;  // strict > keeps ties on the lowest class index
    for (int o = 1; o < out_dim; ++o) {
      if (logits[o] > logits[best]) best = o;
    }
    if (best == dataset.labels[i]) ++correct;
  }
  result.accuracy = static_cast<double>(correct) / dataset.size();
  return result;
}

void checkpoint_save(const std::string& path, const CheckpointData& data) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint: " + tmp);
    out.write(kCheckpointMagic, 13);
    put_u32(out, kCheckpointVersion);
    put_string(out, data.config_text);
    put_vector(out, data.params);
    put_vector(out, data.ema.m);
    put_vector(out, data.momentum_buffer);
    put_string(out, data.optimizer_rng);
    put_u32(out, data.sampler_mode == data::SamplerMode::EpochShuffle ? 1u : 0u);
    put_u64(out, static_cast<std::uint64_t>(data.sampler_n));
    put_u64(out, data.sampler_cursor);
    put_u64(out, data.sampler_permutation.size());
    for (int idx : data.sampler_permutation) put_u64(out, static_cast<std::uint64_t>(idx));
    put_string(out, data.sampler_rng);
    put_u64(out, static_cast<std::uint64_t>(data.step));
    put_f64(out, data.ema.lambda);
    put_u64(out, static_cast<std::uint64_t>(data.ema.steps_seen));
  }
  fs::rename(tmp, path);
}

CheckpointData checkpoint_load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint: " + path);
  char magic[13];
  in.read(magic, 13);
  if (!in || std::string(magic, 13) != kCheckpointMagic) {
    throw FormatError("bad checkpoint magic in " + path);
  }
  const std::uint32_t version = get_u32(in, path);
  if (version != kCheckpointVersion) {
    throw FormatError("unsupported checkpoint version " + std::to_string(version));
  }
  CheckpointData data;
  data.config_text = get_string(in, path);
  data.params = get_vector(in, path);
  data.ema.m = get_vector(in, path);
  data.momentum_buffer = get_vector(in, path);
  data.optimizer_rng = get_string(in, path);
  data.sampler_mode = get_u32(in, path) == 1u ? data::SamplerMode::EpochShuffle
                                              : data::SamplerMode::WithReplacement;
  data.sampler_n = static_cast<int>(get_u64(in, path));
  data.sampler_cursor = get_u64(in, path);
  const std::uint64_t plen = get_u64(in, path);
  data.sampler_permutation.resize(plen);
  for (auto& idx : data.sampler_permutation) idx = static_cast<int>(get_u64(in, path));
  data.sampler_rng = get_string(in, path);
  data.step = static_cast<long>(get_u64(in, path));
  data.ema.lambda = get_f64(in, path);
  data.ema.steps_seen = static_cast<long>(get_u64(in, path));
  return data;
}

Dataset build_dataset(const config::ExperimentConfig& cfg) {
  const std::uint64_t seed = derive_seed(cfg.run.seed, SeedStream::DataGen);
  switch (cfg.data.source) {
    case config::DataSource::GaussianMixture:
      return data::gen_gaussian_mixture(cfg.data.n, cfg.data.dim, cfg.data.classes,
                                        cfg.data.spread, seed);
    case config::DataSource::TwoMoons:
      return data::gen_two_moons(cfg.data.n, cfg.data.gen_noise, seed);
    case config::DataSource::LinearRegression:
      return data::gen_linear_regression(cfg.data.n, cfg.data.dim, cfg.data.gen_noise, seed);
    case config::DataSource::AxisQuadratic:
      return data::gen_axis_quadratic(cfg.data.quad_h);
    case config::DataSource::Idx:
      return data::load_idx(cfg.data.images, cfg.data.labels);
  }
  throw ConfigError("unhandled data source");
}

std::pair<Dataset, Dataset> build_splits(const config::ExperimentConfig& cfg) {
  Dataset full = build_dataset(cfg);
  Dataset train;
  Dataset test;
  if (cfg.data.split >= 1.0) {
    train = std::move(full);
  } else {
    auto parts = data::split_dataset(full, cfg.data.split,
                                     derive_seed(cfg.run.seed, SeedStream::Split));
    train = std::move(parts.first);
    test = std::move(parts.second);
  }
  if (cfg.data.noise_rate > 0.0) {
    train = data::inject_label_noise(train, cfg.data.noise_rate,
                                     derive_seed(cfg.run.seed, SeedStream::LabelNoise));
  }
  if (cfg.model.input_dim() != train.dim()) {
    throw ConfigError("model input width " + std::to_string(cfg.model.input_dim()) +
                      " does not match data dim " + std::to_string(train.dim()));
  }
  return {std::move(train), std::move(test)};
}

RunRecord train(const config::ExperimentConfig& cfg) {
  const auto t_start = std::chrono::steady_clock::now();
  cfg.validate();

  const fs::path out_dir(cfg.run.out);
  fs::create_directories(out_dir);

  RunRecord rec;
  rec.status = "ok";
  rec.seed = cfg.run.seed;
  rec.config_text = config::to_text(cfg);
  rec.out_dir = out_dir.string();
  rec.metrics_csv = (out_dir / "metrics.csv").string();
  rec.checkpoint = (out_dir / "final.ckpt").string();
  rec.manifest = (out_dir / "manifest.json").string();

  auto [train_set, test_set] = build_splits(cfg);

  ParamVector params;
  data::SamplerState sampler(train_set.size(), cfg.run.sampler,
                             derive_seed(cfg.run.seed, SeedStream::Sampler));
  optim::OptimizerState state(static_cast<std::size_t>(model::param_count(cfg.model)),
                              cfg.optimizer.lambda,
                              derive_seed(cfg.run.seed, SeedStream::Optimizer));
  long start_step = 0;

  if (!cfg.run.resume_from.empty()) {
    const CheckpointData ckpt = checkpoint_load(cfg.run.resume_from);
    check_resume_compatible(ckpt.config_text, rec.config_text);
    params = ckpt.params;
    state.ema.m = ckpt.ema.m;
    state.ema.lambda = ckpt.ema.lambda;
    state.ema.steps_seen = ckpt.ema.steps_seen;
    state.momentum_buffer = ckpt.momentum_buffer;
    state.step = ckpt.step;
    rng_from_string(state.rng, ckpt.optimizer_rng);
    sampler.mode = ckpt.sampler_mode;
    sampler.n = ckpt.sampler_n;
    sampler.cursor = ckpt.sampler_cursor;
    sampler.permutation = ckpt.sampler_permutation;
    rng_from_string(sampler.rng, ckpt.sampler_rng);
    start_step = ckpt.step;
  } else {
    params = model::init_params(cfg.model, derive_seed(cfg.run.seed, SeedStream::Init));
  }

  auto make_checkpoint = [&](long step) {
    CheckpointData ckpt;
    ckpt.config_text = rec.config_text;
    ckpt.step = step;
    ckpt.params = params;
    ckpt.ema = state.ema;
    ckpt.momentum_buffer = state.momentum_buffer;
    ckpt.optimizer_rng = rng_to_string(state.rng);
    ckpt.sampler_mode = sampler.mode;
    ckpt.sampler_n = sampler.n;
    ckpt.sampler_cursor = sampler.cursor;
    ckpt.sampler_permutation = sampler.permutation;
    ckpt.sampler_rng = rng_to_string(sampler.rng);
    return ckpt;
  };

  std::ofstream csv(rec.metrics_csv, std::ios::binary | std::ios::trunc);
  if (!csv) throw IoError("cannot write " + rec.metrics_csv);
  csv << kMetricsHeader << '\n';

  std::ofstream decomp_csv;
  if (cfg.run.decomp_every > 0) {
    const std::string path = (out_dir / "decomp.csv").string();
    decomp_csv.open(path, std::ios::binary | std::ios::trunc);
    decomp_csv << "step,cosine,full_component_norm,noise_component_norm\n";
  }

  StepContext ctx{&cfg.model, &train_set, &cfg};
  const long T = cfg.run.steps;

  for (long t = start_step; t < T; ++t) {
    if (cfg.run.checkpoint_at > 0 && t == cfg.run.checkpoint_at) {
      checkpoint_save((out_dir / "mid.ckpt").string(), make_checkpoint(t));
    }

    const double lr = optim::lr_at(cfg.optimizer, t, T);
    const double rho = optim::rho_at(cfg.optimizer, t);
    const ParamVector params_before = params;
    Batch descent_batch;
    optim::StepResult step =
        dispatch_step(ctx, params, sampler, state, lr, rho, descent_batch);

    rec.grad_eval_examples += cfg.run.batch_size + step.report.extra_grad_evals;

    MetricsRow row;
    row.step = t;
    row.lr = lr;
    row.rho = rho;
    row.report = step.report;

    if (cfg.run.phi_every > 0 && t % cfg.run.phi_every == 0) {
      row.phi = diagnostics::ema_error(state.ema, cfg.model, params_before, train_set);
    }
    if (decomp_csv.is_open() && t % cfg.run.decomp_every == 0) {
      // decompose this step's minibatch gradient against the full gradient
      const ParamVector gf = model::full_grad(cfg.model, params_before, train_set);
      const ParamVector gb = model::grad(cfg.model, params_before, descent_batch).grad;
      const numkit::Decomposition dec = numkit::decompose_paper(gf, gb);
      decomp_csv << t << ',' << fmt(dec.cosine) << ',' << fmt(norm2(dec.full_component))
                 << ',' << fmt(norm2(dec.noise_component)) << '\n';
    }

    const bool eval_due =
        (cfg.run.eval_every > 0 && (t + 1) % cfg.run.eval_every == 0) || t + 1 == T;
    if (eval_due && test_set.size() > 0) {
      const EvalResult ev = evaluate(cfg.model, step.params, test_set);
      row.test_loss = ev.loss;
      row.test_acc = ev.accuracy;
    }

    csv << row.to_csv() << '\n';

    const bool diverged = !std::isfinite(step.report.loss_at_w) ||
                          step.report.loss_at_w > kDivergenceThreshold ||
                          !std::isfinite(step.report.loss_at_perturbed) ||
                          step.report.loss_at_perturbed > kDivergenceThreshold;
    params = std::move(step.params);
    rec.steps_run = t + 1 - start_step;
    if (diverged) {
      rec.status = "diverged";
      rec.divergence_step = t;
      break;
    }
  }
  csv.close();

  checkpoint_save(rec.checkpoint, make_checkpoint(rec.status == "ok" ? T : rec.divergence_step));

  const EvalResult train_eval = evaluate(cfg.model, params, train_set);
  rec.final_train_loss = train_eval.loss;
  rec.final_train_acc = train_eval.accuracy;
  if (test_set.size() > 0) {
    const EvalResult test_eval = evaluate(cfg.model, params, test_set);
    rec.final_test_loss = test_eval.loss;
    rec.final_test_acc = test_eval.accuracy;
  }

  if (cfg.run.spectrum_k > 0 && rec.status == "ok") {
    const int iters = cfg.run.spectrum_iters > 0 ? cfg.run.spectrum_iters
                                                 : 5 * cfg.run.spectrum_k;
    const diagnostics::SpectrumReport spectrum = diagnostics::lanczos_spectrum(
        cfg.model, params, train_set, cfg.run.spectrum_k, iters,
        derive_seed(cfg.run.seed, SeedStream::Diagnostics));
    json j;
    j["eigenvalues"] = spectrum.eigenvalues;
    j["lambda1"] = spectrum.lambda1;
    if (spectrum.ratio_1_5) j["ratio_1_5"] = *spectrum.ratio_1_5;
    j["breakdown"] = spectrum.breakdown;
    write_text_atomic((out_dir / "spectrum.json").string(), j.dump(2) + "\n");
  }

  rec.wall_time_ms = std::chrono::duration<double, std::milli>(
                         std::chrono::steady_clock::now() - t_start)
                         .count();

  json manifest = record_to_json(rec);
  if (cfg.run.phi_every > 0 || cfg.run.decomp_every > 0) {
    manifest["note"] = "full-gradient diagnostics enabled; adds O(n) passes per measurement";
  }
  write_text_atomic(rec.manifest, manifest.dump(2) + "\n");
  return rec;
}

SweepAxis sweep_axis_from_name(const std::string& name) {
  if (name == "rho") return SweepAxis::Rho;
  if (name == "batch_size") return SweepAxis::BatchSize;
  if (name == "noise_rate") return SweepAxis::NoiseRate;
  if (name == "strength_k") return SweepAxis::StrengthK;
  if (name == "gamma") return SweepAxis::Gamma;
  throw ConfigError("unknown sweep axis: " + name);
}

std::string sweep_axis_name(SweepAxis axis) {
  switch (axis) {
    case SweepAxis::Rho: return "rho";
    case SweepAxis::BatchSize: return "batch_size";
    case SweepAxis::NoiseRate: return "noise_rate";
    case SweepAxis::StrengthK: return "strength_k";
    case SweepAxis::Gamma: return "gamma";
  }
  return "rho";
}

namespace {

config::ExperimentConfig apply_axis(const config::ExperimentConfig& base, SweepAxis axis,
                                    double value) {
  config::ExperimentConfig cfg = base;
  switch (axis) {
    case SweepAxis::Rho: cfg.optimizer.rho = value; break;
    case SweepAxis::BatchSize: cfg.run.batch_size = static_cast<int>(value); break;
    case SweepAxis::NoiseRate: cfg.data.noise_rate = value; break;
    case SweepAxis::StrengthK: cfg.optimizer.strength_k = static_cast<int>(value); break;
    case SweepAxis::Gamma: cfg.optimizer.gamma0 = value; break;
  }
  return cfg;
}

}  // namespace

SweepResult sweep(const config::ExperimentConfig& base, SweepAxis axis,
                  const std::vector<double>& values, const std::vector<std::uint64_t>& seeds,
                  const std::string& out_dir, int workers) {
  if (values.empty() || seeds.empty()) {
    throw ConfigError("sweep needs at least one value and one seed");
  }
  fs::create_directories(out_dir);

  struct Job {
    config::ExperimentConfig cfg;
    double value;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  for (const double value : values) {
    for (const std::uint64_t seed : seeds) {
      Job job{apply_axis(base, axis, value), value, seed};
      job.cfg.run.seed = seed;
      std::ostringstream dir;
      dir << out_dir << "/run_" << sweep_axis_name(axis) << "=" << fmt(value)
          << "_seed=" << seed;
      job.cfg.run.out = dir.str();
      jobs.push_back(std::move(job));
    }
  }

  SweepResult result;
  result.records.resize(jobs.size());
  int nworkers = workers > 0 ? workers
                             : static_cast<int>(std::thread::hardware_concurrency());
  if (nworkers < 1) nworkers = 1;
  nworkers = std::min<int>(nworkers, static_cast<int>(jobs.size()));

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::string first_error;
  auto worker = [&]() {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= jobs.size()) return;
      try {
        result.records[i] = train(jobs[i].cfg);
      } catch (const std::exception& e) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (first_error.empty()) first_error = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int w = 0; w < nworkers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (!first_error.empty()) throw ConfigError("sweep run failed: " + first_error);

  json summary;
  summary["axis"] = sweep_axis_name(axis);
  summary["values"] = values;
  summary["seeds"] = seeds;
  json runs = json::array();
  for (std::size_t i = 0; i < jobs.size(); ++i) {
    const RunRecord& rec = result.records[i];
    json r;
    r["value"] = jobs[i].value;
    r["seed"] = jobs[i].seed;
    r["dir"] = rec.out_dir;
    r["status"] = rec.status;
    r["final_train_loss"] = rec.final_train_loss;
    if (rec.final_test_loss) r["final_test_loss"] = *rec.final_test_loss;
    if (rec.final_test_acc) r["final_test_acc"] = *rec.final_test_acc;
    runs.push_back(std::move(r));
  }
  summary["runs"] = runs;

  json aggregate = json::array();
  std::vector<double> agg_x, agg_mean, agg_std;
  for (const double value : values) {
    double sum = 0.0, sumsq = 0.0;
    long count = 0;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
      if (jobs[i].value == value && result.records[i].final_test_acc) {
        const double a = *result.records[i].final_test_acc;
        sum += a;
        sumsq += a * a;
        ++count;
      }
    }
    if (count == 0) continue;
    const double mean = sum / count;
    const double var = count > 1 ? std::max(0.0, (sumsq - sum * sum / count) / (count - 1)) : 0.0;
    json a;
    a["value"] = value;
    a["mean_test_acc"] = mean;
    a["std_test_acc"] = std::sqrt(var);
    a["runs"] = count;
    aggregate.push_back(std::move(a));
    agg_x.push_back(value);
    agg_mean.push_back(mean);
    agg_std.push_back(std::sqrt(var));
  }
  summary["aggregate"] = aggregate;

  result.summary_json = out_dir + "/sweep_summary.json";
  write_text_atomic(result.summary_json, summary.dump(2) + "\n");

  if (!agg_x.empty()) {
    svg::Chart chart;
    chart.title = "sweep: final test accuracy vs " + sweep_axis_name(axis);
    chart.x_label = sweep_axis_name(axis);
    chart.y_label = "test accuracy";
    svg::Series series;
    series.name = "mean over seeds";
    series.x = agg_x;
    series.y = agg_mean;
    series.y_err = agg_std;
    chart.series.push_back(std::move(series));
    result.summary_svg = out_dir + "/sweep_summary.svg";
    svg::write_line_chart(result.summary_svg, chart);
  }
  return result;
}

}  // namespace sharpkit::harness
