#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "mapfsel/harness.hpp"

using namespace mapfsel;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("mapfsel_harness_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write_tiny_dataset(const fs::path& dir) {
  fs::create_directories(dir / "maps");
  fs::create_directories(dir / "scens");
  std::ofstream map(dir / "maps" / "tiny.map");
  map << "type octile\nheight 4\nwidth 4\nmap\n....\n.@..\n....\n....\n";
  map.close();
  for (int i = 1; i <= 2; ++i) {
    std::ofstream scen(dir / "scens" / ("tiny-" + std::to_string(i) + ".scen"));
    scen << "version 1\n";
    // 4 agents around the ring, goals rotated by i
    int cells[6][2] = {{0, 0}, {0, 3}, {3, 3}, {3, 0}, {0, 1}, {2, 2}};
    for (int a = 0; a < 4; ++a) {
      int* s = cells[a];
      int* g = cells[(a + i) % 6];
      scen << "0\ttiny.map\t4\t4\t" << s[1] << "\t" << s[0] << "\t" << g[1]
           << "\t" << g[0] << "\t1\n";
    }
  }
}

SweepPlan tiny_plan(const fs::path& dir) {
  SweepPlan plan;
  for (int i = 1; i <= 2; ++i)
    plan.scenarios.push_back({"tiny", (dir / "maps" / "tiny.map").string(),
                              "tiny-" + std::to_string(i),
                              (dir / "scens" / ("tiny-" + std::to_string(i) + ".scen")).string()});
  plan.agent_start = 2;
  plan.agent_step = 1;
  plan.time_limit = 5.0;
  plan.expansion_budget_mode = true;
  plan.expansion_budget = 100'000;
  plan.workers = 1;
  return plan;
}

std::vector<SolverSpec> tiny_portfolio() {
  return {SolverSpec::parse("cbs"), SolverSpec::parse("pp"),
          SolverSpec::parse("pibt")};
}

}  // namespace

TEST_CASE("record lines round-trip, including failures") {
  RunRecord r;
  r.map_name = "open16";
  r.scenario_id = "open16-3";
  r.agent_count = 20;
  r.solver_id = "ecbs:1.1";
  r.time_s = 1.234567;
  r.cost = 321;
  r.success = true;
  r.seed = 42;
  auto back = RunRecord::from_line(r.to_line());
  REQUIRE(back);
  CHECK(back->map_name == r.map_name);
  CHECK(back->scenario_id == r.scenario_id);
  CHECK(back->agent_count == 20);
  CHECK(back->solver_id == "ecbs:1.1");
  CHECK(back->time_s == doctest::Approx(1.234567));
  CHECK(back->cost == r.cost);
  CHECK(back->success);
  CHECK(back->seed == 42);

  r.success = false;
  r.cost.reset();
  auto fail = RunRecord::from_line(r.to_line());
  REQUIRE(fail);
  CHECK(!fail->cost.has_value());
  CHECK(!fail->success);

  CHECK(!RunRecord::from_line("garbage"));
  CHECK(!RunRecord::from_line(""));
}

TEST_CASE("run_one produces validated records under an expansion budget") {
  TempDir tmp;
  write_tiny_dataset(tmp.path);
  Grid g = parse_map_file((tmp.path / "maps" / "tiny.map").string());
  Scenario scn =
      parse_scenario_file((tmp.path / "scens" / "tiny-1.scen").string(), g, 3);
  // run_one uses wall budgets internally only in wall mode; drive solve()
  // through the sweep instead, here just check the record shape
  RunRecord rec = run_one(scn, "tiny-1", SolverSpec::parse("cbs"), 5.0, 1);
  CHECK(rec.scenario_id == "tiny-1");
  CHECK(rec.agent_count == 3);
  if (rec.success) {
    REQUIRE(rec.cost);
    CHECK(*rec.cost >= 0);
    CHECK(rec.time_s <= 5.0);
  }
}

TEST_CASE("sweep emits one record per (scenario, tier, solver) and stops") {
  TempDir tmp;
  write_tiny_dataset(tmp.path);
  std::string log = (tmp.path / "records.log").string();

  int alarms = 0;
  SweepCallbacks cb;
  cb.on_alarm = [&](const std::string&) { ++alarms; };
  run_sweep(tiny_plan(tmp.path), tiny_portfolio(), log, cb);

  std::vector<RunRecord> records = read_record_log(log);
  REQUIRE(!records.empty());
  CHECK(records.size() % 3 == 0);  // portfolio of three, no partial groups

  // no duplicate keys
  std::set<std::string> keys;
  for (const auto& r : records) {
    std::string key = r.scenario_id + "/" + std::to_string(r.agent_count) +
                      "/" + r.solver_id;
    CHECK(keys.insert(key).second);
  }
  // tiers are contiguous from agent_start: 2, 3, 4 at most (files hold 4)
  for (const auto& r : records) {
    CHECK(r.agent_count >= 2);
    CHECK(r.agent_count <= 4);
  }
}

TEST_CASE("a finished sweep resumes to a no-op; a truncated one backfills") {
  TempDir tmp;
  write_tiny_dataset(tmp.path);
  std::string log = (tmp.path / "records.log").string();

  run_sweep(tiny_plan(tmp.path), tiny_portfolio(), log);
  std::vector<RunRecord> first = read_record_log(log);

  int added = 0;
  SweepCallbacks cb;
  cb.on_record = [&](const RunRecord&) { ++added; };
  run_sweep(tiny_plan(tmp.path), tiny_portfolio(), log, cb);
  CHECK(added == 0);
  CHECK(read_record_log(log).size() == first.size());

  // drop the last record and the checkpoint; the sweep must re-run only it
  {
    std::ofstream out(log, std::ios::trunc);
    for (std::size_t i = 0; i + 1 < first.size(); ++i)
      out << first[i].to_line() << "\n";
  }
  fs::remove(log + ".checkpoint");
  run_sweep(tiny_plan(tmp.path), tiny_portfolio(), log, cb);
  CHECK(added == 1);

  std::vector<RunRecord> resumed = read_record_log(log);
  REQUIRE(resumed.size() == first.size());
}

TEST_CASE("expansion-budget sweeps are bit-identical across runs") {
  TempDir tmp;
  write_tiny_dataset(tmp.path);
  std::string log_a = (tmp.path / "a.log").string();
  std::string log_b = (tmp.path / "b.log").string();
  run_sweep(tiny_plan(tmp.path), tiny_portfolio(), log_a);
  run_sweep(tiny_plan(tmp.path), tiny_portfolio(), log_b);

  std::ifstream fa(log_a), fb(log_b);
  std::stringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  CHECK(sa.str() == sb.str());
  CHECK(!sa.str().empty());
}

TEST_CASE("records CSV carries the full log") {
  TempDir tmp;
  write_tiny_dataset(tmp.path);
  std::string log = (tmp.path / "records.log").string();
  run_sweep(tiny_plan(tmp.path), tiny_portfolio(), log);
  auto records = read_record_log(log);
  std::string csv = (tmp.path / "records.csv").string();
  write_records_csv(records, csv);

  std::ifstream in(csv);
  std::string header;
  std::getline(in, header);
  CHECK(header == "map,scenario,agents,solver,time_s,cost,success,seed");
  std::size_t rows = 0;
  for (std::string line; std::getline(in, line);)
    if (!line.empty()) ++rows;
  CHECK(rows == records.size());
}
