#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "mapfsel/config.hpp"
#include "mapfsel/pipeline.hpp"

using namespace mapfsel;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("mapfsel_pipeline_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_tiny_dataset(const fs::path& dir) {
  fs::create_directories(dir / "maps");
  fs::create_directories(dir / "scens");
  std::ofstream map(dir / "maps" / "tiny.map");
  map << "type octile\nheight 5\nwidth 5\nmap\n.....\n.@.@.\n.....\n.@.@.\n.....\n";
  map.close();
  std::mt19937_64 rng(1);
  int cells[][2] = {{0, 0}, {0, 2}, {0, 4}, {2, 0}, {2, 2}, {2, 4},
                    {4, 0}, {4, 2}, {4, 4}, {1, 0}, {3, 2}, {1, 4}};
  for (int i = 1; i <= 4; ++i) {
    std::ofstream scen(dir / "scens" / ("tiny-" + std::to_string(i) + ".scen"));
    scen << "version 1\n";
    for (int a = 0; a < 6; ++a) {
      int* s = cells[a];
      int* g = cells[(a + i) % 12];
      scen << "0\ttiny.map\t5\t5\t" << s[1] << "\t" << s[0] << "\t" << g[1]
           << "\t" << g[0] << "\t1\n";
    }
  }
}

PipelineConfig tiny_config(const fs::path& dir) {
  PipelineConfig cfg = PipelineConfig::from(Config{});
  cfg.maps_dir = (dir / "maps").string();
  cfg.scens_dir = (dir / "scens").string();
  cfg.output_dir = (dir / "out").string();
  cfg.agent_start = 2;
  cfg.agent_step = 2;
  cfg.time_limit = 5.0;
  cfg.expansion_budget_mode = true;
  cfg.expansion_budget = 100'000;
  cfg.target = 16;
  cfg.epochs = 20;
  // only four scenarios: this seed puts 2/1/1 of them in train/val/test so
  // every split is populated
  cfg.split_train = 0.5;
  cfg.split_val = 0.25;
  cfg.split_test = 0.25;
  cfg.split_seed = 4;
  return cfg;
}

int run(int (*cmd)(const PipelineConfig&, bool, std::ostream&, std::ostream&),
        const PipelineConfig& cfg, bool force = false) {
  std::ostringstream out, err;
  int rc = cmd(cfg, force, out, err);
  if (rc != 0) INFO("stderr: ", err.str());
  return rc;
}

}  // namespace

TEST_CASE("split assignment is stable and respects the fractions") {
  std::map<Split, int> counts;
  for (int i = 0; i < 20000; ++i) {
    std::string key = "scenario-" + std::to_string(i);
    Split s = split_assign(key, 42, 0.7, 0.1);
    CHECK(s == split_assign(key, 42, 0.7, 0.1));  // pure function
    ++counts[s];
  }
  CHECK(counts[Split::TRAIN] > 20000 * 0.67);
  CHECK(counts[Split::TRAIN] < 20000 * 0.73);
  CHECK(counts[Split::VAL] > 20000 * 0.08);
  CHECK(counts[Split::VAL] < 20000 * 0.12);
  CHECK(counts[Split::TEST] > 20000 * 0.17);

  // a different seed reshuffles
  int moved = 0;
  for (int i = 0; i < 1000; ++i) {
    std::string key = "scenario-" + std::to_string(i);
    if (split_assign(key, 1, 0.7, 0.1) != split_assign(key, 2, 0.7, 0.1))
      ++moved;
  }
  CHECK(moved > 100);
}

TEST_CASE("the grouped ablation space expands to 16 unique specs") {
  std::vector<std::string> specs = expand_ablation_groups();
  REQUIRE(specs.size() == 16);
  std::set<std::string> unique(specs.begin(), specs.end());
  CHECK(unique.size() == 16);
  for (const std::string& s : specs) {
    REQUIRE(s.size() == 7);
    // grouping: channels 1-3 move together, as do 5-6
    CHECK(s[0] == s[1]);
    CHECK(s[1] == s[2]);
    CHECK(s[4] == s[5]);
  }
  CHECK(unique.count("ppprrrp") == 1);
  CHECK(unique.count("ppppppp") == 1);
  CHECK(unique.count("rrrrrrr") == 1);
}

TEST_CASE("subcommands before their inputs exist fail with exit 3") {
  TempDir tmp;
  write_tiny_dataset(tmp.path);
  PipelineConfig cfg = tiny_config(tmp.path);
  CHECK(run(cmd_label, cfg) == 3);      // no record log yet
  CHECK(run(cmd_featurize, cfg) == 3);  // same
  CHECK(run(cmd_train, cfg) == 3);      // no labels
  CHECK(run(cmd_report, cfg) == 3);
}

TEST_CASE("config errors fail with exit 2") {
  TempDir tmp;
  write_tiny_dataset(tmp.path);
  PipelineConfig cfg = tiny_config(tmp.path);
  SUBCASE("bad rescale spec") {
    cfg.rescale_spec = "zzzzzzz";
    CHECK(run(cmd_featurize, cfg) == 2);
  }
  SUBCASE("bad split fractions") {
    cfg.split_train = 0.9;
    cfg.split_val = 0.9;
    CHECK(run(cmd_sweep, cfg) == 2);
  }
  SUBCASE("empty portfolio") {
    cfg.portfolio.clear();
    CHECK(run(cmd_sweep, cfg) == 2);
  }
  SUBCASE("regression loss with a bound objective") {
    cfg.objectives = {"bound:1.1"};
    cfg.loss = "reg";
    CHECK(run(cmd_train, cfg) == 2);
  }
}

TEST_CASE("full pipeline over a tiny dataset, idempotence, artifacts") {
  TempDir tmp;
  write_tiny_dataset(tmp.path);
  PipelineConfig cfg = tiny_config(tmp.path);
  cfg.objectives = {"score:0.001", "bound:1.1"};
  cfg.loss = "ce";

  REQUIRE(run(cmd_sweep, cfg) == 0);
  REQUIRE(fs::exists(fs::path(cfg.output_dir) / "records.log"));
  REQUIRE(fs::exists(fs::path(cfg.output_dir) / "records.csv"));

  REQUIRE(run(cmd_label, cfg) == 0);
  REQUIRE(fs::exists(fs::path(cfg.output_dir) / "labels_score-0.001.csv"));
  REQUIRE(fs::exists(fs::path(cfg.output_dir) / "labels_bound-1.1.csv"));

  REQUIRE(run(cmd_featurize, cfg) == 0);
  REQUIRE(fs::exists(fs::path(cfg.output_dir) / "tensors" / "manifest.txt"));

  REQUIRE(run(cmd_train, cfg) == 0);
  REQUIRE(fs::exists(fs::path(cfg.output_dir) / "models" / "Score-0.001-CE.model"));
  REQUIRE(fs::exists(fs::path(cfg.output_dir) / "models" / "Bound-1.1-CE.model"));

  // eval before train for a missing task -> exit 2
  PipelineConfig missing = cfg;
  missing.loss = "bce";
  CHECK(run(cmd_eval, missing) == 2);

  REQUIRE(run(cmd_eval, cfg) == 0);
  REQUIRE(fs::exists(fs::path(cfg.output_dir) / "eval_score-0.001_CE.csv"));
  REQUIRE(run(cmd_report, cfg) == 0);
  REQUIRE(fs::exists(fs::path(cfg.output_dir) / "frequency_score-0.001.csv"));
  REQUIRE(fs::exists(fs::path(cfg.output_dir) / "frequency_score-0.001.svg"));

  // idempotence: completed artifacts are detected and skipped
  std::ostringstream out, err;
  REQUIRE(cmd_featurize(cfg, false, out, err) == 0);
  CHECK(out.str().find("skipping") != std::string::npos);
  out.str("");
  REQUIRE(cmd_train(cfg, false, out, err) == 0);
  CHECK(out.str().find("skipping") != std::string::npos);
  out.str("");
  REQUIRE(cmd_eval(cfg, false, out, err) == 0);
  CHECK(out.str().find("skipping") != std::string::npos);

  // single-spec ablation, duplicates deduplicated
  std::ostringstream aout, aerr;
  REQUIRE(cmd_ablate(cfg, {"ppppppp", "ppppppp"}, false, aout, aerr) == 0);
  REQUIRE(fs::exists(fs::path(cfg.output_dir) / "ablation.csv"));
  std::ifstream ab(fs::path(cfg.output_dir) / "ablation.csv");
  int rows = 0;
  for (std::string line; std::getline(ab, line);)
    if (!line.empty()) ++rows;
  CHECK(rows == 2);  // header + the deduplicated single spec
}

TEST_CASE("the lock file blocks concurrent writers") {
  TempDir tmp;
  write_tiny_dataset(tmp.path);
  PipelineConfig cfg = tiny_config(tmp.path);
  fs::create_directories(cfg.output_dir);
  std::ofstream lock(fs::path(cfg.output_dir) / ".lock");
  lock << "held\n";
  lock.close();
  CHECK(run(cmd_sweep, cfg) == 2);
  fs::remove(fs::path(cfg.output_dir) / ".lock");
  CHECK(run(cmd_sweep, cfg) == 0);
}

TEST_CASE("frequency counts sum to the labeled scenario count per map") {
  TempDir tmp;
  write_tiny_dataset(tmp.path);
  PipelineConfig cfg = tiny_config(tmp.path);
  REQUIRE(run(cmd_sweep, cfg) == 0);
  REQUIRE(run(cmd_label, cfg) == 0);
  REQUIRE(run(cmd_report, cfg) == 0);

  std::ifstream labels(fs::path(cfg.output_dir) / "labels_score-0.001.csv");
  int labeled = -1;  // skip header
  for (std::string line; std::getline(labels, line);)
    if (!line.empty()) ++labeled;

  std::ifstream freq(fs::path(cfg.output_dir) / "frequency_score-0.001.csv");
  std::string header;
  std::getline(freq, header);
  int total = 0;
  for (std::string line; std::getline(freq, line);) {
    std::istringstream ss(line);
    std::string field;
    std::getline(ss, field, ',');  // map name
    while (std::getline(ss, field, ',')) total += std::stoi(field);
  }
  CHECK(total == labeled);
}
