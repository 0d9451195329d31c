#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "reacfuse/hash.hpp"
#include "reacfuse/io.hpp"

namespace fs = std::filesystem;
using namespace reacfuse;

namespace {

std::string binary() {
  const char* p = std::getenv("REACFUSE_BIN");
  REQUIRE_MESSAGE(p != nullptr, "REACFUSE_BIN must point at the CLI binary");
  return p;
}

int run(const std::string& args) {
  std::string cmd = binary() + " " + args + " >/dev/null 2>&1";
  int rc = std::system(cmd.c_str());
  return WEXITSTATUS(rc);
}

fs::path fresh_dir(const std::string& name) {
  fs::path dir = fs::temp_directory_path() / ("rf_cli_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write(const fs::path& p, const std::string& text) { atomic_write(p, text); }

// tiny but complete pipeline configuration
const char* kTinyConfig = R"(
[data]
n_records = 400
test_fraction = 0.10

[model]
n_layers = 2
n_heads = 2
d_model = 16

[textlm]
n_layers = 1
n_heads = 2
d_text = 32
context_length = 96

[mlm]
epochs = 1
batch = 16

[classifier]
epochs = 1
batch = 32
lr = 1e-3

[lm]
epochs = 1
batch = 8
crop = 96
sample_fraction = 0.10

[zsl]
labeler_epochs = 10
)";

}  // namespace

TEST_CASE("gen-data is hash-reproducible per seed") {
  auto d1 = fresh_dir("gen1");
  auto d2 = fresh_dir("gen2");
  auto cfg = d1 / "cfg.ini";
  write(cfg, "[data]\nn_records = 400\n");
  REQUIRE(run("gen-data --config " + cfg.string() + " --seed 5 --out " + d1.string()) == 0);
  REQUIRE(run("gen-data --config " + cfg.string() + " --seed 5 --out " + d2.string()) == 0);
  CHECK(sha256_file(d1 / "corpus.jsonl") == sha256_file(d2 / "corpus.jsonl"));
  CHECK(fs::exists(d1 / "rsc_vocab.txt"));
  CHECK(fs::exists(d1 / "atom_vocab.txt"));
  CHECK(fs::exists(d1 / "planted_rule.txt"));
  CHECK(fs::exists(d1 / "gen-data.manifest.json"));
  CHECK(fs::exists(d1 / "gen-data.config"));

  auto d3 = fresh_dir("gen3");
  REQUIRE(run("gen-data --config " + cfg.string() + " --seed 6 --out " + d3.string()) == 0);
  CHECK(sha256_file(d1 / "corpus.jsonl") != sha256_file(d3 / "corpus.jsonl"));
  fs::remove_all(d1);
  fs::remove_all(d2);
  fs::remove_all(d3);
}

TEST_CASE("unknown config keys are rejected with exit code 2") {
  auto dir = fresh_dir("badkey");
  auto cfg = dir / "cfg.ini";
  write(cfg, "[data]\nn_records = 100\nnot_a_key = 1\n");
  CHECK(run("gen-data --config " + cfg.string() + " --out " + dir.string()) == 2);
  write(cfg, "[nosuchsection]\nx = 1\n");
  CHECK(run("gen-data --config " + cfg.string() + " --out " + dir.string()) == 2);
  fs::remove_all(dir);
}

TEST_CASE("degenerate threshold configuration is rejected") {
  auto dir = fresh_dir("badth");
  auto cfg = dir / "cfg.ini";
  write(cfg, "[zsl]\nthreshold_lo = 0.5\nthreshold_hi = 0.5\n");
  CHECK(run("train-zsl threshold --config " + cfg.string() + " --out " + dir.string()) == 2);
  fs::remove_all(dir);
}

TEST_CASE("missing inputs give a data error, not a crash") {
  auto dir = fresh_dir("missing");
  CHECK(run("pretrain-mlm --out " + dir.string()) == 3);
  fs::remove_all(dir);
}

TEST_CASE("micro pipeline: baseline training, eval, self-comparison") {
  auto dir = fresh_dir("micro");
  auto cfg = dir / "cfg.ini";
  write(cfg, kTinyConfig);
  std::string base = " --config " + cfg.string() + " --seed 3 --out " + dir.string();

  REQUIRE(run("gen-data" + base) == 0);
  REQUIRE(run("pretrain-mlm" + base) == 0);
  REQUIRE(run("train-baseline" + base) == 0);
  CHECK(fs::exists(dir / "baseline.ckpt"));

  // history carries the documented column set
  auto hist = read_lines(dir / "baseline_history.csv");
  REQUIRE(!hist.empty());
  CHECK(hist[0] == "epoch,loss,sensitivity,specificity,balanced_accuracy,roc_auc");

  REQUIRE(run("eval" + base) == 0);
  auto report = read_lines(dir / "report-baseline.csv");
  REQUIRE(report.size() >= 2);
  CHECK(report[0] == "subset,n,sensitivity,specificity,balanced_accuracy,roc_auc");
  CHECK(report[1].substr(0, 8) == "overall,");
  CHECK(fs::exists(dir / "report-baseline_sweep.csv"));

  // comparing a report against itself: all deltas zero
  auto rcfg = dir / "rcfg.ini";
  write(rcfg, std::string(kTinyConfig) + "\n[report]\nvariants = report-baseline.json\n");
  REQUIRE(run("report --config " + rcfg.string() + " --seed 3 --out " + dir.string()) == 0);
  auto cmp = read_lines(dir / "comparison.csv");
  REQUIRE(cmp.size() >= 3);
  for (std::size_t i = 1; i < cmp.size(); ++i) {
    CHECK(cmp[i].find(",+0.000000,+0.000000,+0.000000,+0.000000") != std::string::npos);
  }
  fs::remove_all(dir);
}

TEST_CASE("report rejects mismatched test splits") {
  auto dir = fresh_dir("splitmix");
  auto cfg = dir / "cfg.ini";
  write(cfg, kTinyConfig);
  std::string base = " --config " + cfg.string() + " --seed 4 --out " + dir.string();
  REQUIRE(run("gen-data" + base) == 0);
  REQUIRE(run("pretrain-mlm" + base) == 0);
  REQUIRE(run("train-baseline" + base) == 0);
  REQUIRE(run("eval" + base) == 0);

  // same model, different split fraction -> different split hash
  auto cfg2 = dir / "cfg2.ini";
  write(cfg2, std::string(kTinyConfig) + "\n[eval]\nreport_name = report-other\n");
  // overwrite the data section's split fraction
  write(cfg2, std::string("[data]\nn_records = 400\ntest_fraction = 0.20\n") +
                  "[model]\nn_layers = 2\nn_heads = 2\nd_model = 16\n" +
                  "[eval]\nreport_name = report-other\n");
  REQUIRE(run("eval --config " + cfg2.string() + " --seed 4 --out " + dir.string()) == 0);

  auto rcfg = dir / "rcfg.ini";
  write(rcfg, "[report]\nvariants = report-other.json\n");
  CHECK(run("report --config " + rcfg.string() + " --out " + dir.string()) == 3);
  fs::remove_all(dir);
}
