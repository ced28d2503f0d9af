#include "sharpkit/cli.hpp"

#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "sharpkit/configfile.hpp"
#include "sharpkit/diagnostics.hpp"
#include "sharpkit/harness.hpp"
#include "sharpkit/svg.hpp"
#include "sharpkit/vec.hpp"

namespace sharpkit::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitDiverged = 2;

config::ExperimentConfig load_effective_config(const std::string& path,
                                               const std::vector<std::string>& overrides) {
  config::ConfigMap map = config::load_config_file(path);
  for (const std::string& o : overrides) config::apply_override(map, o);
  return config::experiment_from_map(map);
}

void refuse_existing(const std::string& path, bool overwrite) {
  if (!overwrite && fs::exists(path)) {
    throw ConfigError("refusing to overwrite " + path + " (pass --overwrite)");
  }
}

std::vector<double> parse_value_list(const std::string& csv) {
  std::vector<double> values;
  std::stringstream ss(csv);
  std::string item;
  while (std::getline(ss, item, ',')) {
    char* end = nullptr;
    const double v = std::strtod(item.c_str(), &end);
    if (end == item.c_str() || *end != '\0') {
      throw ConfigError("--values expects a comma-separated number list, got '" + item + "'");
    }
    values.push_back(v);
  }
  if (values.empty()) throw ConfigError("--values list is empty");
  return values;
}

std::vector<std::uint64_t> seed_range(std::uint64_t base, int count) {
  std::vector<std::uint64_t> seeds;
  for (int i = 0; i < count; ++i) seeds.push_back(base + static_cast<std::uint64_t>(i));
  return seeds;
}

int cmd_train(const std::string& config_path, const std::vector<std::string>& overrides,
              const std::string& out_dir, bool overwrite) {
  config::ExperimentConfig cfg = load_effective_config(config_path, overrides);
  if (!out_dir.empty()) cfg.run.out = out_dir;
  refuse_existing(cfg.run.out + "/manifest.json", overwrite);
  const harness::RunRecord rec = harness::train(cfg);
  std::cout << rec.manifest << "\n";
  if (rec.status == "diverged") {
    std::cerr << "run diverged at step " << rec.divergence_step << "\n";
    return kExitDiverged;
  }
  return kExitOk;
}

int cmd_sweep(const std::string& config_path, const std::vector<std::string>& overrides,
              const std::string& axis_name, const std::string& values_csv, int seeds,
              const std::string& out_dir, int workers, bool overwrite) {
  config::ExperimentConfig cfg = load_effective_config(config_path, overrides);
  const std::string out = out_dir.empty() ? cfg.run.out + "/sweep" : out_dir;
  refuse_existing(out + "/sweep_summary.json", overwrite);
  if (seeds < 1) throw ConfigError("--seeds must be >= 1");
  const harness::SweepResult result =
      harness::sweep(cfg, harness::sweep_axis_from_name(axis_name),
                     parse_value_list(values_csv), seed_range(cfg.run.seed, seeds), out,
                     workers);
  std::cout << result.summary_json << "\n";
  for (const auto& rec : result.records) {
    if (rec.status == "diverged") {
      std::cerr << "at least one sweep run diverged (" << rec.out_dir << ")\n";
      return kExitDiverged;
    }
  }
  return kExitOk;
}

int cmd_investigate(const std::string& config_path, const std::vector<std::string>& overrides,
                    int max_k, int seeds, const std::string& out_dir, int workers,
                    bool overwrite) {
  config::ExperimentConfig base = load_effective_config(config_path, overrides);
  const std::string out = out_dir.empty() ? base.run.out + "/investigate" : out_dir;
  refuse_existing(out + "/investigate.json", overwrite);
  if (max_k < 1) throw ConfigError("--max-k must be >= 1");
  if (seeds < 1) throw ConfigError("--seeds must be >= 1");
  fs::create_directories(out);

  struct Entry {
    std::string name;
    config::ExperimentConfig cfg;
  };
  std::vector<Entry> entries;
  const std::vector<std::uint64_t> seed_list = seed_range(base.run.seed, seeds);
  const char* quintet[] = {"sgd", "sam", "sam-full", "sam-db", "sam-noise"};
  for (const char* name : quintet) {
    for (std::uint64_t seed : seed_list) {
      Entry e;
      e.name = name;
      e.cfg = base;
      e.cfg.optimizer.variant = optim::variant_from_name(name);
      e.cfg.optimizer.strength_k = 1;
      e.cfg.run.seed = seed;
      e.cfg.run.out = out + "/" + e.name + "_seed=" + std::to_string(seed);
      entries.push_back(std::move(e));
    }
  }
  for (int k = 1; k <= max_k; ++k) {
    for (std::uint64_t seed : seed_list) {
      Entry e;
      e.name = "sam-strength-k" + std::to_string(k);
      e.cfg = base;
      e.cfg.optimizer.variant = optim::Variant::SamStrength;
      e.cfg.optimizer.strength_k = k;
      e.cfg.run.seed = seed;
      e.cfg.run.out = out + "/" + e.name + "_seed=" + std::to_string(seed);
      entries.push_back(std::move(e));
    }
  }

  // embarrassingly parallel over entries
  std::vector<harness::RunRecord> records(entries.size());
  {
    std::atomic<std::size_t> next{0};
    std::mutex error_mutex;
    std::string first_error;
    int nworkers = workers > 0 ? workers
                               : static_cast<int>(std::thread::hardware_concurrency());
    if (nworkers < 1) nworkers = 1;
    nworkers = std::min<int>(nworkers, static_cast<int>(entries.size()));
    auto work = [&]() {
      while (true) {
        const std::size_t i = next.fetch_add(1);
        if (i >= entries.size()) return;
        try {
          records[i] = harness::train(entries[i].cfg);
        } catch (const std::exception& e) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (first_error.empty()) first_error = e.what();
        }
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < nworkers; ++w) pool.emplace_back(work);
    for (auto& th : pool) th.join();
    if (!first_error.empty()) throw ConfigError("investigate run failed: " + first_error);
  }

  json out_json;
  out_json["max_k"] = max_k;
  out_json["seeds"] = seed_list;
  json variants = json::object();
  std::map<std::string, std::pair<double, int>> acc_by_name;  // sum, count
  for (std::size_t i = 0; i < entries.size(); ++i) {
    json e;
    e["seed"] = records[i].seed;
    e["status"] = records[i].status;
    e["final_train_loss"] = records[i].final_train_loss;
    if (records[i].final_test_loss) e["final_test_loss"] = *records[i].final_test_loss;
    if (records[i].final_test_acc) {
      e["final_test_acc"] = *records[i].final_test_acc;
      auto& [sum, cnt] = acc_by_name[entries[i].name];
      sum += *records[i].final_test_acc;
      cnt += 1;
    }
    e["dir"] = records[i].out_dir;
    variants[entries[i].name].push_back(std::move(e));
  }
  out_json["variants"] = variants;

  const std::string json_path = out + "/investigate.json";
  harness::write_text_atomic(json_path, out_json.dump(2) + "\n");

  // SVG: bars for the variant quintet, line over strength k
  svg::BarChart bars;
  bars.title = "final test accuracy by perturbation variant";
  bars.y_label = "test accuracy";
  for (const char* name : quintet) {
    const auto it = acc_by_name.find(name);
    if (it == acc_by_name.end() || it->second.second == 0) continue;
    bars.labels.push_back(name);
    bars.values.push_back(it->second.first / it->second.second);
  }
  svg::Chart strength;
  strength.title = "final test accuracy vs perturbation batch multiple k";
  strength.x_label = "k";
  strength.y_label = "test accuracy";
  svg::Series srs;
  srs.name = "sam-strength";
  for (int k = 1; k <= max_k; ++k) {
    const auto it = acc_by_name.find("sam-strength-k" + std::to_string(k));
    if (it == acc_by_name.end() || it->second.second == 0) continue;
    srs.x.push_back(k);
    srs.y.push_back(it->second.first / it->second.second);
  }
  strength.series.push_back(std::move(srs));
  svg::write_panel_svg(out + "/investigate.svg",
                       {svg::render_bar_chart(bars), svg::render_line_chart(strength)}, 860, 520);

  std::cout << json_path << "\n";
  for (const auto& rec : records) {
    if (rec.status == "diverged") {
      std::cerr << "at least one run diverged (" << rec.out_dir << ")\n";
      return kExitDiverged;
    }
  }
  return kExitOk;
}

int cmd_spectrum(const std::string& ckpt_path, int k, int iters, const std::string& out_dir,
                 bool overwrite) {
  const harness::CheckpointData ckpt = harness::checkpoint_load(ckpt_path);
  const config::ExperimentConfig cfg =
      config::experiment_from_map(config::parse_config_text(ckpt.config_text));
  const std::string out =
      out_dir.empty() ? fs::path(ckpt_path).parent_path().string() : out_dir;
  fs::create_directories(out.empty() ? "." : out);
  const std::string json_path = (fs::path(out.empty() ? "." : out) / "spectrum.json").string();
  refuse_existing(json_path, overwrite);

  auto [train_set, test_set] = harness::build_splits(cfg);
  (void)test_set;
  if (k > static_cast<int>(ckpt.params.size())) {
    throw ConfigError("--k exceeds the parameter dimension " +
                      std::to_string(ckpt.params.size()));
  }
  const int use_iters = iters > 0 ? iters : 5 * k;
  const diagnostics::SpectrumReport report = diagnostics::lanczos_spectrum(
      cfg.model, ckpt.params, train_set, k, use_iters,
      derive_seed(cfg.run.seed, SeedStream::Diagnostics));

  json j;
  j["checkpoint"] = ckpt_path;
  j["k"] = k;
  j["iters"] = use_iters;
  j["eigenvalues"] = report.eigenvalues;
  j["lambda1"] = report.lambda1;
  if (report.ratio_1_5) j["ratio_1_5"] = *report.ratio_1_5;
  j["breakdown"] = report.breakdown;
  harness::write_text_atomic(json_path, j.dump(2) + "\n");

  svg::Chart chart;
  chart.title = "Hessian Ritz values (descending)";
  chart.x_label = "index";
  chart.y_label = "eigenvalue";
  svg::Series s;
  s.name = "ritz";
  for (std::size_t i = 0; i < report.eigenvalues.size(); ++i) {
    s.x.push_back(static_cast<double>(i + 1));
    s.y.push_back(report.eigenvalues[i]);
  }
  chart.series.push_back(std::move(s));
  svg::write_line_chart((fs::path(out.empty() ? "." : out) / "spectrum.svg").string(), chart);

  std::cout << json_path << "\n";
  return kExitOk;
}

struct CsvTable {
  std::vector<std::string> columns;
  std::vector<std::vector<std::optional<double>>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return static_cast<int>(i);
    }
    return -1;
  }
};

CsvTable read_metrics_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  CsvTable table;
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty CSV: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  {
    std::stringstream ss(line);
    std::string col;
    while (std::getline(ss, col, ',')) table.columns.push_back(col);
  }
  if (table.columns.empty() || table.columns[0] != "step") {
    throw FormatError("malformed CSV header in " + path);
  }
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::optional<double>> row;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      if (cell.empty()) {
        row.push_back(std::nullopt);
      } else {
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end == cell.c_str()) throw FormatError("bad CSV cell '" + cell + "' in " + path);
        row.push_back(v);
      }
    }
    while (row.size() < table.columns.size()) row.push_back(std::nullopt);
    table.rows.push_back(std::move(row));
  }
  return table;
}

int cmd_plot(const std::vector<std::string>& inputs, const std::string& out_path,
             bool overwrite) {
  if (inputs.empty()) throw ConfigError("plot needs at least one --inputs CSV");
  refuse_existing(out_path, overwrite);

  svg::Chart loss_chart;
  loss_chart.title = "loss vs step";
  loss_chart.x_label = "step";
  loss_chart.y_label = "loss";
  svg::Chart acc_chart;
  acc_chart.title = "test accuracy vs step";
  acc_chart.x_label = "step";
  acc_chart.y_label = "accuracy";
  svg::Chart phi_chart;
  phi_chart.title = "EMA estimation error vs step";
  phi_chart.x_label = "step";
  phi_chart.y_label = "phi";

  for (const std::string& path : inputs) {
    const CsvTable table = read_metrics_csv(path);
    const std::string stem = fs::path(path).parent_path().filename().string().empty()
                                 ? fs::path(path).stem().string()
                                 : fs::path(path).parent_path().filename().string();
    const int c_step = table.column("step");
    auto collect = [&](const std::string& col) {
      svg::Series s;
      const int c = table.column(col);
      if (c < 0) return s;
      for (const auto& row : table.rows) {
        if (row[c_step] && row[c]) {
          s.x.push_back(*row[c_step]);
          s.y.push_back(*row[c]);
        }
      }
      return s;
    };
    svg::Series train_loss = collect("train_loss");
    if (!train_loss.x.empty()) {
      train_loss.name = stem + " train";
      loss_chart.series.push_back(std::move(train_loss));
    }
    svg::Series test_loss = collect("test_loss");
    if (!test_loss.x.empty()) {
      test_loss.name = stem + " test";
      loss_chart.series.push_back(std::move(test_loss));
    }
    svg::Series acc = collect("test_acc");
    if (!acc.x.empty()) {
      acc.name = stem;
      acc_chart.series.push_back(std::move(acc));
    }
    svg::Series phi = collect("phi");
    if (!phi.x.empty()) {
      phi.name = stem;
      phi_chart.series.push_back(std::move(phi));
    }
  }

  std::vector<std::string> panels;
  if (!loss_chart.series.empty()) panels.push_back(svg::render_line_chart(loss_chart));
  if (!acc_chart.series.empty()) panels.push_back(svg::render_line_chart(acc_chart));
  if (!phi_chart.series.empty()) panels.push_back(svg::render_line_chart(phi_chart));
  if (panels.empty()) throw ConfigError("no plottable series found in the inputs");
  svg::write_panel_svg(out_path, panels, 860, 520);
  std::cout << out_path << "\n";
  return kExitOk;
}

}  // namespace

int run(int argc, const char* const* argv) {
  CLI::App app{"sharpness-aware optimization toolkit"};
  app.require_subcommand(1);

  std::string config_path, out_dir, axis, values_csv, ckpt_path, plot_out;
  std::vector<std::string> overrides, plot_inputs;
  int seeds = 1, max_k = 4, k = 5, iters = 0, workers = 0;
  bool overwrite = false;

  CLI::App* train = app.add_subcommand("train", "run one training configuration");
  train->add_option("--config", config_path, "config file")->required();
  train->add_option("--set", overrides, "override section.key=value");
  train->add_option("--out", out_dir, "output directory (overrides run.out)");
  train->add_flag("--overwrite", overwrite, "allow writing over existing outputs");

  CLI::App* sweep = app.add_subcommand("sweep", "grid of runs over one axis");
  sweep->add_option("--config", config_path, "config file")->required();
  sweep->add_option("--axis", axis, "rho|batch_size|noise_rate|strength_k|gamma")->required();
  sweep->add_option("--values", values_csv, "comma-separated values")->required();
  sweep->add_option("--seeds", seeds, "number of seeds (base seed, base+1, ...)")->required();
  sweep->add_option("--set", overrides, "override section.key=value");
  sweep->add_option("--out", out_dir, "output directory");
  sweep->add_option("--workers", workers, "parallel runs (default: hardware)");
  sweep->add_flag("--overwrite", overwrite, "allow writing over existing outputs");

  CLI::App* investigate =
      app.add_subcommand("investigate", "matched perturbation-variant comparison");
  investigate->add_option("--config", config_path, "config file")->required();
  investigate->add_option("--max-k", max_k, "largest perturbation batch multiple")->required();
  investigate->add_option("--seeds", seeds, "number of seeds");
  investigate->add_option("--set", overrides, "override section.key=value");
  investigate->add_option("--out", out_dir, "output directory");
  investigate->add_option("--workers", workers, "parallel runs (default: hardware)");
  investigate->add_flag("--overwrite", overwrite, "allow writing over existing outputs");

  CLI::App* spectrum = app.add_subcommand("spectrum", "Hessian spectrum from a checkpoint");
  spectrum->add_option("--ckpt", ckpt_path, "checkpoint file")->required();
  spectrum->add_option("--k", k, "number of Ritz values")->required();
  spectrum->add_option("--iters", iters, "Lanczos iterations (default 5k)");
  spectrum->add_option("--out", out_dir, "output directory (default: beside the checkpoint)");
  spectrum->add_flag("--overwrite", overwrite, "allow writing over existing outputs");

  CLI::App* plot = app.add_subcommand("plot", "render metrics CSVs as SVG");
  plot->add_option("--inputs", plot_inputs, "metrics CSV files")->required();
  plot->add_option("--out", plot_out, "output SVG path")->required();
  plot->add_flag("--overwrite", overwrite, "allow writing over existing outputs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitError;
  }

  try {
    if (train->parsed()) return cmd_train(config_path, overrides, out_dir, overwrite);
    if (sweep->parsed()) {
      return cmd_sweep(config_path, overrides, axis, values_csv, seeds, out_dir, workers,
                       overwrite);
    }
    if (investigate->parsed()) {
      return cmd_investigate(config_path, overrides, max_k, seeds, out_dir, workers, overwrite);
    }
    if (spectrum->parsed()) return cmd_spectrum(ckpt_path, k, iters, out_dir, overwrite);
    if (plot->parsed()) return cmd_plot(plot_inputs, plot_out, overwrite);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}

}  // namespace sharpkit::cli
