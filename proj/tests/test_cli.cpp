#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "sharpkit/cli.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

int run_cli(const std::vector<std::string>& args) {
  std::vector<const char*> argv;
  argv.push_back("sharpkit");
  for (const auto& a : args) argv.push_back(a.c_str());
  return sharpkit::cli::run(static_cast<int>(argv.size()), argv.data());
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::path("tmp_cli") / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_config(const fs::path& dir, const std::string& body) {
  const fs::path path = dir / "config.cfg";
  std::ofstream out(path);
  out << body;
  return path.string();
}

const char* kSmallConfig = R"cfg(
[model]
kind = logistic-softmax
layers = 2,2
loss = cross-entropy

[data]
source = gaussian-mixture
n = 60
dim = 2
classes = 2
spread = 2.0
split = 0.75

[optimizer]
variant = sam
rho = 0.1
momentum = 0.9
weight_decay = 0.0005
lr_schedule = cosine
gamma0 = 0.1

[run]
steps = 25
batch_size = 5
eval_every = 10
seed = 4
)cfg";

json read_json(const std::string& path) {
  std::ifstream in(path);
  REQUIRE(in);
  json j;
  in >> j;
  return j;
}

}  // namespace

TEST_CASE("train command writes a run and respects overwrite protection") {
  const fs::path dir = fresh_dir("train");
  const std::string cfg = write_config(dir, kSmallConfig);
  const std::string out = (dir / "run").string();

  CHECK(run_cli({"train", "--config", cfg, "--out", out}) == 0);
  CHECK(fs::exists(out + "/metrics.csv"));
  CHECK(fs::exists(out + "/manifest.json"));
  CHECK(fs::exists(out + "/final.ckpt"));

  // rerun refuses, then succeeds with --overwrite
  CHECK(run_cli({"train", "--config", cfg, "--out", out}) == 1);
  CHECK(run_cli({"train", "--config", cfg, "--out", out, "--overwrite"}) == 0);
}

TEST_CASE("unknown config keys and bad usage exit 1") {
  const fs::path dir = fresh_dir("badcfg");
  const std::string cfg =
      write_config(dir, std::string(kSmallConfig) + "\n[optimizer]\nrhoo = 1\n");
  CHECK(run_cli({"train", "--config", cfg, "--out", (dir / "x").string()}) == 1);

  const std::string ok = write_config(dir, kSmallConfig);
  CHECK(run_cli({"train", "--config", ok, "--set", "optimizer.bogus=1", "--out",
                 (dir / "y").string()}) == 1);
  CHECK(run_cli({"train", "--config", (dir / "missing.cfg").string(), "--out",
                 (dir / "z").string()}) == 1);
  CHECK(run_cli({"nonsense"}) == 1);
}

TEST_CASE("forced divergence exits 2") {
  const fs::path dir = fresh_dir("diverge");
  const std::string cfg = write_config(dir, kSmallConfig);
  CHECK(run_cli({"train", "--config", cfg, "--set", "optimizer.gamma0=1e6", "--set",
                 "optimizer.lr_schedule=constant", "--set", "optimizer.variant=sgd",
                 "--out", (dir / "run").string()}) == 2);
}

TEST_CASE("set overrides change the effective config") {
  const fs::path dir = fresh_dir("override");
  const std::string cfg = write_config(dir, kSmallConfig);
  const std::string out = (dir / "run").string();
  CHECK(run_cli({"train", "--config", cfg, "--set", "run.steps=5", "--out", out}) == 0);
  const json manifest = read_json(out + "/manifest.json");
  CHECK(manifest["steps_run"] == 5);
  CHECK(manifest["config"].get<std::string>().find("steps = 5") != std::string::npos);
}

TEST_CASE("sweep command writes records and summary") {
  const fs::path dir = fresh_dir("sweep");
  const std::string cfg = write_config(dir, kSmallConfig);
  const std::string out = (dir / "out").string();
  CHECK(run_cli({"sweep", "--config", cfg, "--axis", "rho", "--values", "0.05,0.2",
                 "--seeds", "2", "--out", out, "--workers", "2"}) == 0);
  const json summary = read_json(out + "/sweep_summary.json");
  CHECK(summary["runs"].size() == 4);
  CHECK(summary["aggregate"].size() == 2);
  CHECK(fs::exists(out + "/sweep_summary.svg"));

  CHECK(run_cli({"sweep", "--config", cfg, "--axis", "nope", "--values", "1", "--seeds",
                 "1", "--out", (dir / "bad").string()}) == 1);
}

TEST_CASE("investigate runs the matched variant set") {
  const fs::path dir = fresh_dir("investigate");
  std::string body = kSmallConfig;
  body += "\n[run]\nsteps = 20\n";
  const std::string cfg = write_config(dir, body);
  const std::string out = (dir / "out").string();
  CHECK(run_cli({"investigate", "--config", cfg, "--max-k", "2", "--seeds", "2", "--out",
                 out, "--workers", "4"}) == 0);
  const json report = read_json(out + "/investigate.json");
  for (const char* name : {"sgd", "sam", "sam-full", "sam-db", "sam-noise",
                           "sam-strength-k1", "sam-strength-k2"}) {
    REQUIRE(report["variants"].contains(name));
    CHECK(report["variants"][name].size() == 2);  // one entry per seed
  }
  CHECK(fs::exists(out + "/investigate.svg"));

  // strength k=1 reproduces the plain sam run exactly
  const auto& sam = report["variants"]["sam"];
  const auto& k1 = report["variants"]["sam-strength-k1"];
  for (std::size_t i = 0; i < sam.size(); ++i) {
    CHECK(sam[i]["final_train_loss"] == k1[i]["final_train_loss"]);
  }
}

TEST_CASE("investigate with rho=0 collapses every variant") {
  const fs::path dir = fresh_dir("investigate_zero");
  const std::string cfg = write_config(dir, kSmallConfig);
  const std::string out = (dir / "out").string();
  CHECK(run_cli({"investigate", "--config", cfg, "--set", "optimizer.rho=0", "--max-k",
                 "1", "--out", out, "--workers", "4"}) == 0);
  const json report = read_json(out + "/investigate.json");
  const double ref = report["variants"]["sgd"][0]["final_train_loss"];
  for (const char* name : {"sam", "sam-full", "sam-db", "sam-noise", "sam-strength-k1"}) {
    CHECK(double(report["variants"][name][0]["final_train_loss"]) == ref);
  }
}

TEST_CASE("spectrum command recovers a known quadratic spectrum") {
  const fs::path dir = fresh_dir("spectrum");
  // Hessian diag(5,2,1,1,1) via the axis-quadratic source
  const std::string cfg = write_config(dir, R"cfg(
[model]
kind = linear-regression
layers = 4,1
loss = mse

[data]
source = axis-quadratic
quad_h = 5,2,1,1
split = 1.0

[optimizer]
variant = sgd
rho = 0
momentum = 0
weight_decay = 0
lr_schedule = constant
gamma0 = 0.05

[run]
steps = 10
batch_size = 8
eval_every = 0
seed = 2
)cfg");
  const std::string out = (dir / "run").string();
  REQUIRE(run_cli({"train", "--config", cfg, "--out", out}) == 0);

  const std::string spec_out = (dir / "spec").string();
  CHECK(run_cli({"spectrum", "--ckpt", out + "/final.ckpt", "--k", "5", "--iters", "25",
                 "--out", spec_out}) == 0);
  const json spectrum = read_json(spec_out + "/spectrum.json");
  CHECK(std::abs(double(spectrum["lambda1"]) - 5.0) < 1e-5);
  CHECK(std::abs(double(spectrum["ratio_1_5"]) - 5.0) < 1e-4);
  CHECK(fs::exists(spec_out + "/spectrum.svg"));

  // k above the parameter dimension is a config error
  CHECK(run_cli({"spectrum", "--ckpt", out + "/final.ckpt", "--k", "6", "--out",
                 (dir / "bad").string()}) == 1);
  // missing checkpoint
  CHECK(run_cli({"spectrum", "--ckpt", (dir / "none.ckpt").string(), "--k", "2"}) == 1);
}

TEST_CASE("plot command renders CSVs and rejects malformed input") {
  const fs::path dir = fresh_dir("plot");
  const std::string cfg = write_config(dir, kSmallConfig);
  const std::string run_a = (dir / "a").string();
  const std::string run_b = (dir / "b").string();
  REQUIRE(run_cli({"train", "--config", cfg, "--out", run_a}) == 0);
  REQUIRE(run_cli({"train", "--config", cfg, "--set", "run.seed=9", "--out", run_b}) == 0);

  const std::string svg = (dir / "curves.svg").string();
  CHECK(run_cli({"plot", "--inputs", run_a + "/metrics.csv", run_b + "/metrics.csv",
                 "--out", svg}) == 0);
  CHECK(fs::exists(svg));
  {
    std::ifstream in(svg);
    std::stringstream ss;
    ss << in.rdbuf();
    CHECK(ss.str().find("<svg") != std::string::npos);
    CHECK(ss.str().find("loss vs step") != std::string::npos);
  }
  // refuses to overwrite without the flag
  CHECK(run_cli({"plot", "--inputs", run_a + "/metrics.csv", "--out", svg}) == 1);
  CHECK(run_cli({"plot", "--inputs", run_a + "/metrics.csv", "--out", svg,
                 "--overwrite"}) == 0);

  // malformed header
  const std::string bad = (dir / "bad.csv").string();
  {
    std::ofstream out(bad);
    out << "not,a,metrics,file\n1,2,3,4\n";
  }
  CHECK(run_cli({"plot", "--inputs", bad, "--out", (dir / "bad.svg").string()}) == 1);
}

TEST_CASE("plot tolerates missing optional columns") {
  const fs::path dir = fresh_dir("plot_sparse");
  // no eval, no phi: only train_loss series present
  std::string body = kSmallConfig;
  body += "\n[run]\neval_every = 0\n";
  const std::string cfg = write_config(dir, body);
  const std::string out = (dir / "run").string();
  REQUIRE(run_cli({"train", "--config", cfg, "--out", out}) == 0);
  // strip the test columns entirely to simulate a reduced CSV
  const std::string svg = (dir / "sparse.svg").string();
  CHECK(run_cli({"plot", "--inputs", out + "/metrics.csv", "--out", svg}) == 0);
  CHECK(fs::exists(svg));
}
