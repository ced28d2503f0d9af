#include "sharpkit/configfile.hpp"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace sharpkit::config {

namespace {

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

long parse_long(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const long value = std::strtol(v.c_str(), &end, 10);
  if (end == v.c_str() || *end != '\0') {
    throw ConfigError("config: " + key + " expects an integer, got '" + v + "'");
  }
  return value;
}

double parse_dbl(const std::string& key, const std::string& v) {
  char* end = nullptr;
  const double value = std::strtod(v.c_str(), &end);
  if (end == v.c_str() || *end != '\0') {
    throw ConfigError("config: " + key + " expects a number, got '" + v + "'");
  }
  return value;
}

std::vector<std::string> split_csv(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ConfigMap parse_config_text(const std::string& text) {
  ConfigMap map;
  std::stringstream ss(text);
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']') {
        throw ConfigError("config: malformed section header at line " + std::to_string(lineno));
      }
      section = trim(t.substr(1, t.size() - 2));
      map[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config: expected key=value at line " + std::to_string(lineno));
    }
    if (section.empty()) {
      throw ConfigError("config: key outside any [section] at line " + std::to_string(lineno));
    }
    map[section][trim(t.substr(0, eq))] = trim(t.substr(eq + 1));
  }
  return map;
}

ConfigMap load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

void apply_override(ConfigMap& map, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw ConfigError("override must be section.key=value: " + assignment);
  }
  const std::string path = trim(assignment.substr(0, eq));
  const auto dotpos = path.find('.');
  if (dotpos == std::string::npos) {
    throw ConfigError("override must be section.key=value: " + assignment);
  }
  map[path.substr(0, dotpos)][path.substr(dotpos + 1)] = trim(assignment.substr(eq + 1));
}

namespace {

model::ModelSpec model_from_section(const std::map<std::string, std::string>& sec) {
  model::ModelSpec spec;
  for (const auto& [key, value] : sec) {
    if (key == "kind") {
      if (value == "linear-regression") spec.kind = model::ModelKind::LinearRegression;
      else if (value == "logistic-softmax") spec.kind = model::ModelKind::LogisticSoftmax;
      else if (value == "mlp") spec.kind = model::ModelKind::Mlp;
      else throw ConfigError("config: unknown model.kind '" + value + "'");
    } else if (key == "layers") {
      spec.layer_sizes.clear();
      for (const auto& s : split_csv(value)) {
        spec.layer_sizes.push_back(static_cast<int>(parse_long("model.layers", s)));
      }
    } else if (key == "activation") {
      if (value == "tanh") spec.activation = model::Activation::Tanh;
      else if (value == "relu") spec.activation = model::Activation::Relu;
      else throw ConfigError("config: unknown model.activation '" + value + "'");
    } else if (key == "loss") {
      if (value == "mse") spec.loss = model::LossKind::Mse;
      else if (value == "cross-entropy") spec.loss = model::LossKind::CrossEntropy;
      else throw ConfigError("config: unknown model.loss '" + value + "'");
    } else {
      throw ConfigError("config: unknown key model." + key);
    }
  }
  return spec;
}

DataConfig data_from_section(const std::map<std::string, std::string>& sec) {
  DataConfig d;
  for (const auto& [key, value] : sec) {
    if (key == "source") {
      if (value == "gaussian-mixture") d.source = DataSource::GaussianMixture;
      else if (value == "two-moons") d.source = DataSource::TwoMoons;
      else if (value == "linear-regression") d.source = DataSource::LinearRegression;
      else if (value == "axis-quadratic") d.source = DataSource::AxisQuadratic;
      else if (value == "idx") d.source = DataSource::Idx;
      else throw ConfigError("config: unknown data.source '" + value + "'");
    } else if (key == "n") d.n = static_cast<int>(parse_long("data.n", value));
    else if (key == "dim") d.dim = static_cast<int>(parse_long("data.dim", value));
    else if (key == "classes") d.classes = static_cast<int>(parse_long("data.classes", value));
    else if (key == "spread") d.spread = parse_dbl("data.spread", value);
    else if (key == "gen_noise") d.gen_noise = parse_dbl("data.gen_noise", value);
    else if (key == "noise_rate") d.noise_rate = parse_dbl("data.noise_rate", value);
    else if (key == "split") d.split = parse_dbl("data.split", value);
    else if (key == "images") d.images = value;
    else if (key == "labels") d.labels = value;
    else if (key == "quad_h") {
      d.quad_h.clear();
      for (const auto& s : split_csv(value)) d.quad_h.push_back(parse_dbl("data.quad_h", s));
    } else {
      throw ConfigError("config: unknown key data." + key);
    }
  }
  return d;
}

optim::OptimizerConfig optimizer_from_section(const std::map<std::string, std::string>& sec) {
  optim::OptimizerConfig o;
  for (const auto& [key, value] : sec) {
    if (key == "variant") o.variant = optim::variant_from_name(value);
    else if (key == "rho") o.rho = parse_dbl("optimizer.rho", value);
    else if (key == "lambda") o.lambda = parse_dbl("optimizer.lambda", value);
    else if (key == "sigma") o.sigma = parse_dbl("optimizer.sigma", value);
    else if (key == "sigma_mode") {
      if (value == "constant") o.sigma_mode = optim::SigmaMode::Constant;
      else if (value == "cosine") o.sigma_mode = optim::SigmaMode::Cosine;
      else throw ConfigError("config: unknown optimizer.sigma_mode '" + value + "'");
    } else if (key == "momentum") o.momentum = parse_dbl("optimizer.momentum", value);
    else if (key == "weight_decay") o.weight_decay = parse_dbl("optimizer.weight_decay", value);
    else if (key == "strength_k") o.strength_k = static_cast<int>(parse_long("optimizer.strength_k", value));
    else if (key == "lr_schedule") {
      if (value == "constant") o.lr_schedule = optim::LrSchedule::Constant;
      else if (value == "cosine") o.lr_schedule = optim::LrSchedule::Cosine;
      else if (value == "inv-sqrt-total") o.lr_schedule = optim::LrSchedule::InvSqrtTotal;
      else throw ConfigError("config: unknown optimizer.lr_schedule '" + value + "'");
    } else if (key == "rho_schedule") {
      if (value == "constant") o.rho_schedule = optim::RhoSchedule::Constant;
      else if (value == "inv-sqrt-step") o.rho_schedule = optim::RhoSchedule::InvSqrtStep;
      else throw ConfigError("config: unknown optimizer.rho_schedule '" + value + "'");
    } else if (key == "gamma0") o.gamma0 = parse_dbl("optimizer.gamma0", value);
    else if (key == "asam_eta") o.asam_eta = parse_dbl("optimizer.asam_eta", value);
    else throw ConfigError("config: unknown key optimizer." + key);
  }
  return o;
}

RunConfig run_from_section(const std::map<std::string, std::string>& sec) {
  RunConfig r;
  for (const auto& [key, value] : sec) {
    if (key == "steps") r.steps = parse_long("run.steps", value);
    else if (key == "batch_size") r.batch_size = static_cast<int>(parse_long("run.batch_size", value));
    else if (key == "eval_every") r.eval_every = parse_long("run.eval_every", value);
    else if (key == "seed") r.seed = static_cast<std::uint64_t>(parse_long("run.seed", value));
    else if (key == "sampler") {
      if (value == "epoch-shuffle") r.sampler = data::SamplerMode::EpochShuffle;
      else if (value == "with-replacement") r.sampler = data::SamplerMode::WithReplacement;
      else throw ConfigError("config: unknown run.sampler '" + value + "'");
    } else if (key == "phi_every") r.phi_every = parse_long("run.phi_every", value);
    else if (key == "decomp_every") r.decomp_every = parse_long("run.decomp_every", value);
    else if (key == "spectrum_k") r.spectrum_k = static_cast<int>(parse_long("run.spectrum_k", value));
    else if (key == "spectrum_iters") r.spectrum_iters = static_cast<int>(parse_long("run.spectrum_iters", value));
    else if (key == "checkpoint_at") r.checkpoint_at = parse_long("run.checkpoint_at", value);
    else if (key == "resume_from") r.resume_from = value;
    else if (key == "out") r.out = value;
    else throw ConfigError("config: unknown key run." + key);
  }
  return r;
}

}  // namespace

ExperimentConfig experiment_from_map(const ConfigMap& map) {
  ExperimentConfig cfg;
  for (const auto& [section, entries] : map) {
    if (section == "model") cfg.model = model_from_section(entries);
    else if (section == "data") cfg.data = data_from_section(entries);
    else if (section == "optimizer") cfg.optimizer = optimizer_from_section(entries);
    else if (section == "run") cfg.run = run_from_section(entries);
    else throw ConfigError("config: unknown section [" + section + "]");
  }
  cfg.validate();
  return cfg;
}

void ExperimentConfig::validate() const {
  model.validate();
  optimizer.validate();
  if (run.steps < 1) throw ConfigError("config: run.steps must be >= 1");
  if (run.batch_size < 1) throw ConfigError("config: run.batch_size must be >= 1");
  if (data.split <= 0.0 || data.split > 1.0) {
    throw ConfigError("config: data.split must be in (0,1]");
  }
  if (data.noise_rate < 0.0 || data.noise_rate > 1.0) {
    throw ConfigError("config: data.noise_rate must be in [0,1]");
  }
  if (data.noise_rate > 0.0 &&
      (data.source == DataSource::LinearRegression || data.source == DataSource::AxisQuadratic)) {
    throw ConfigError("config: label noise requires a classification source");
  }
  if (data.source == DataSource::Idx && (data.images.empty() || data.labels.empty())) {
    throw ConfigError("config: idx source needs data.images and data.labels");
  }
  if (data.source == DataSource::AxisQuadratic && data.quad_h.empty()) {
    throw ConfigError("config: axis-quadratic source needs data.quad_h");
  }
  if (run.checkpoint_at < 0 || run.checkpoint_at >= run.steps) {
    if (run.checkpoint_at != 0) {
      throw ConfigError("config: run.checkpoint_at must lie inside (0, steps)");
    }
  }
}

std::string to_text(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[model]\n";
  out << "kind = "
      << (c.model.kind == model::ModelKind::LinearRegression ? "linear-regression"
          : c.model.kind == model::ModelKind::LogisticSoftmax ? "logistic-softmax"
                                                              : "mlp")
      << "\n";
  out << "layers = ";
  for (std::size_t i = 0; i < c.model.layer_sizes.size(); ++i) {
    if (i) out << ",";
    out << c.model.layer_sizes[i];
  }
  out << "\n";
  out << "activation = " << (c.model.activation == model::Activation::Tanh ? "tanh" : "relu") << "\n";
  out << "loss = " << (c.model.loss == model::LossKind::Mse ? "mse" : "cross-entropy") << "\n";

  out << "\n[data]\n";
  const char* src = "gaussian-mixture";
  switch (c.data.source) {
    case DataSource::GaussianMixture: src = "gaussian-mixture"; break;
    case DataSource::TwoMoons: src = "two-moons"; break;
    case DataSource::LinearRegression: src = "linear-regression"; break;
    case DataSource::AxisQuadratic: src = "axis-quadratic"; break;
    case DataSource::Idx: src = "idx"; break;
  }
  out << "source = " << src << "\n";
  out << "n = " << c.data.n << "\n";
  out << "dim = " << c.data.dim << "\n";
  out << "classes = " << c.data.classes << "\n";
  out << "spread = " << format_double(c.data.spread) << "\n";
  out << "gen_noise = " << format_double(c.data.gen_noise) << "\n";
  out << "noise_rate = " << format_double(c.data.noise_rate) << "\n";
  out << "split = " << format_double(c.data.split) << "\n";
  if (!c.data.images.empty()) out << "images = " << c.data.images << "\n";
  if (!c.data.labels.empty()) out << "labels = " << c.data.labels << "\n";
  if (!c.data.quad_h.empty()) {
    out << "quad_h = ";
    for (std::size_t i = 0; i < c.data.quad_h.size(); ++i) {
      if (i) out << ",";
      out << format_double(c.data.quad_h[i]);
    }
    out << "\n";
  }

  out << "\n[optimizer]\n";
  out << "variant = " << optim::variant_name(c.optimizer.variant) << "\n";
  out << "rho = " << format_double(c.optimizer.rho) << "\n";
  out << "lambda = " << format_double(c.optimizer.lambda) << "\n";
  out << "sigma = " << format_double(c.optimizer.sigma) << "\n";
  out << "sigma_mode = "
      << (c.optimizer.sigma_mode == optim::SigmaMode::Constant ? "constant" : "cosine") << "\n";
  out << "momentum = " << format_double(c.optimizer.momentum) << "\n";
  out << "weight_decay = " << format_double(c.optimizer.weight_decay) << "\n";
  out << "strength_k = " << c.optimizer.strength_k << "\n";
  out << "lr_schedule = "
      << (c.optimizer.lr_schedule == optim::LrSchedule::Constant ? "constant"
          : c.optimizer.lr_schedule == optim::LrSchedule::Cosine ? "cosine"
                                                                 : "inv-sqrt-total")
      << "\n";
  out << "rho_schedule = "
      << (c.optimizer.rho_schedule == optim::RhoSchedule::Constant ? "constant" : "inv-sqrt-step")
      << "\n";
  out << "gamma0 = " << format_double(c.optimizer.gamma0) << "\n";
  out << "asam_eta = " << format_double(c.optimizer.asam_eta) << "\n";

  out << "\n[run]\n";
  out << "steps = " << c.run.steps << "\n";
  out << "batch_size = " << c.run.batch_size << "\n";
  out << "eval_every = " << c.run.eval_every << "\n";
  out << "seed = " << c.run.seed << "\n";
  out << "sampler = "
      << (c.run.sampler == data::SamplerMode::EpochShuffle ? "epoch-shuffle" : "with-replacement")
      << "\n";
  out << "phi_every = " << c.run.phi_every << "\n";
  out << "decomp_every = " << c.run.decomp_every << "\n";
  out << "spectrum_k = " << c.run.spectrum_k << "\n";
  out << "spectrum_iters = " << c.run.spectrum_iters << "\n";
  out << "checkpoint_at = " << c.run.checkpoint_at << "\n";
  if (!c.run.resume_from.empty()) out << "resume_from = " << c.run.resume_from << "\n";
  out << "out = " << c.run.out << "\n";
  return out.str();
}

}  // namespace sharpkit::config
