#pragma once
// Portfolio execution over map/scenario sweeps: run records, the
// agent-count sweep with its stop rule, and the append-only record log.

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "mapfsel/solvers.hpp"

namespace mapfsel {

struct RunRecord {
  std::string map_name;
  std::string scenario_id;
  int agent_count = 0;
  std::string solver_id;
  double time_s = 0.0;
  std::optional<long long> cost;  // absent on failure
  bool success = false;
  uint64_t seed = 0;

  std::string to_line() const;  // one key=value record line
  static std::optional<RunRecord> from_line(const std::string& line);
};

struct SweepPlan {
  // (map_name, map_path, scenario_id, scen_path) tuples
  struct ScenarioRef {
    std::string map_name;
    std::string map_path;
    std::string scenario_id;
    std::string scen_path;
  };
  std::vector<ScenarioRef> scenarios;
  int agent_start = 10;
  int agent_step = 10;
  double time_limit = 120.0;
  int min_surviving_solvers = 2;  // stop once <= this many succeed per tier
  bool expansion_budget_mode = false;  // deterministic budgets for CI
  long long expansion_budget = 2'000'000;
  uint64_t seed = 1;
  int workers = 1;
};

// Runs one (scenario, solver) pair under the time limit. Any returned
// solution is validated before success is recorded; an invalid one flips
// success off and raises an integrity alarm through `alarm`.
RunRecord run_one(const Scenario& scn, const std::string& scenario_id,
                  const SolverSpec& spec, double time_limit, uint64_t seed,
                  const std::function<void(const std::string&)>* alarm = nullptr);

// Full sweep per the dataset-construction protocol: for every scenario of a
// map, agent tiers agent_start, +step, ... run against the whole portfolio;
// a map's sweep stops after the first tier where at most
// min_surviving_solvers succeed on every scenario. Records stream to
// `log_path` (append-only, resumable via the side checkpoint file).
struct SweepCallbacks {
  std::function<void(const RunRecord&)> on_record;          // optional
  std::function<void(const std::string&)> on_alarm;         // optional
  std::function<void(const std::string&, int)> on_tier_done;  // map, tier
};

void run_sweep(const SweepPlan& plan, const std::vector<SolverSpec>& portfolio,
               const std::string& log_path, const SweepCallbacks& cb = {});

std::vector<RunRecord> read_record_log(const std::string& path);
void write_records_csv(const std::vector<RunRecord>& records,
                       const std::string& path);

}  // namespace mapfsel
