#include "mapfsel/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace mapfsel {
namespace {

std::string fmt_time(double t) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", t);
  return buf;
}

}  // namespace

std::string RunRecord::to_line() const {
  std::ostringstream out;
  out << "map=" << map_name << " scenario=" << scenario_id
      << " agents=" << agent_count << " solver=" << solver_id
      << " time_s=" << fmt_time(time_s) << " cost="
      << (cost ? std::to_string(*cost) : std::string("-"))
      << " success=" << (success ? 1 : 0) << " seed=" << seed;
  return out.str();
}

std::optional<RunRecord> RunRecord::from_line(const std::string& line) {
  RunRecord rec;
  std::istringstream ss(line);
  std::string token;
  int fields = 0;
  while (ss >> token) {
    auto eq = token.find('=');
    if (eq == std::string::npos) return std::nullopt;
    std::string key = token.substr(0, eq);
    std::string val = token.substr(eq + 1);
    try {
      if (key == "map") rec.map_name = val;
      else if (key == "scenario") rec.scenario_id = val;
      else if (key == "agents") rec.agent_count = std::stoi(val);
      else if (key == "solver") rec.solver_id = val;
      else if (key == "time_s") rec.time_s = std::stod(val);
      else if (key == "cost") rec.cost = val == "-" ? std::optional<long long>{}
                                                    : std::stoll(val);
      else if (key == "success") rec.success = val == "1";
      else if (key == "seed") rec.seed = std::stoull(val);
      else return std::nullopt;
    } catch (const std::exception&) {
      return std::nullopt;
    }
    ++fields;
  }
  if (fields != 8) return std::nullopt;
  return rec;
}

RunRecord run_one(const Scenario& scn, const std::string& scenario_id,
                  const SolverSpec& spec, double time_limit, uint64_t seed,
                  const std::function<void(const std::string&)>* alarm) {
  RunRecord rec;
  rec.map_name = scn.map_name;
  rec.scenario_id = scenario_id;
  rec.agent_count = scn.agent_count();
  rec.solver_id = spec.id;
  rec.seed = seed;

  Budget budget = Budget::wall_clock(time_limit);
  auto t0 = std::chrono::steady_clock::now();
  SolveResult result;
  try {
    result = solve(spec, scn, budget, seed);
  } catch (const std::exception& e) {
    result.status = SolveStatus::FAILURE;  // solver crash counts as failure
    if (alarm && *alarm) (*alarm)("solver crash (" + spec.id + "): " + e.what());
  }
  rec.time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
          .count();

  if (result.status == SolveStatus::SOLVED) {
    ValidationReport vr = validate(result.solution, scn);
    if (vr.ok()) {
      rec.success = true;
      rec.cost = result.solution.sum_of_costs;
    } else if (alarm && *alarm) {
      (*alarm)("integrity alarm: invalid solution from " + spec.id + " on " +
               scenario_id + ": " + vr.violations.front().detail);
    }
  }
  if (rec.success && rec.time_s > time_limit) {
    rec.success = false;  // finished but over budget
    rec.cost.reset();
  }
  return rec;
}

namespace {

struct Task {
  const Scenario* scn;
  std::string scenario_id;
  SolverSpec spec;
  std::size_t slot;
};

}  // namespace

void run_sweep(const SweepPlan& plan, const std::vector<SolverSpec>& portfolio,
               const std::string& log_path, const SweepCallbacks& cb) {
  if (portfolio.empty()) throw std::invalid_argument("empty portfolio");

  // resume: already-written (scenario, agents, solver) keys are never redone
  std::set<std::string> done;
  for (const auto& rec : read_record_log(log_path))
    done.insert(rec.scenario_id + "/" + std::to_string(rec.agent_count) + "/" +
                rec.solver_id);

  std::ofstream log(log_path, std::ios::app);
  if (!log) throw std::runtime_error("cannot open record log " + log_path);

  // group scenario refs by map, preserving plan order
  std::vector<std::pair<std::string, std::vector<const SweepPlan::ScenarioRef*>>>
      by_map;
  for (const auto& ref : plan.scenarios) {
    auto it = std::find_if(by_map.begin(), by_map.end(),
                           [&](const auto& p) { return p.first == ref.map_name; });
    if (it == by_map.end()) {
      by_map.push_back({ref.map_name, {}});
      it = std::prev(by_map.end());
    }
    it->second.push_back(&ref);
  }

  std::map<std::string, Grid> maps;
  for (const auto& [name, refs] : by_map)
    maps.emplace(name, parse_map_file(refs.front()->map_path));

  auto run_task = [&](const Scenario& scn, const std::string& scenario_id,
                      const SolverSpec& spec) -> RunRecord {
    if (plan.expansion_budget_mode) {
      RunRecord rec;
      rec.map_name = scn.map_name;
      rec.scenario_id = scenario_id;
      rec.agent_count = scn.agent_count();
      rec.solver_id = spec.id;
      rec.seed = plan.seed;
      Budget budget = Budget::expansions(plan.expansion_budget);
      SolveResult result;
      try {
        result = solve(spec, scn, budget, plan.seed);
      } catch (const std::exception&) {
        result.status = SolveStatus::FAILURE;
      }
      if (result.status == SolveStatus::SOLVED &&
          validate(result.solution, scn).ok()) {
        rec.success = true;
        rec.cost = result.solution.sum_of_costs;
      }
      // deterministic pseudo-time proportional to the work actually charged
      rec.time_s = plan.time_limit * static_cast<double>(budget.used()) /
                   static_cast<double>(plan.expansion_budget);
      return rec;
    }
    const std::function<void(const std::string&)>* alarm =
        cb.on_alarm ? &cb.on_alarm : nullptr;
    return run_one(scn, scenario_id, spec, plan.time_limit, plan.seed, alarm);
  };

  const int workers = std::max(1, plan.workers);

  for (const auto& [map_name, refs] : by_map) {
    const Grid& grid = maps.at(map_name);
    for (int tier = plan.agent_start;; tier += plan.agent_step) {
      // load scenarios at this tier; a scen file with too few agents ends
      // the map's sweep
      std::vector<Scenario> scens;
      std::vector<std::string> ids;
      bool exhausted = false;
      for (const auto* ref : refs) {
        try {
          Scenario s = parse_scenario_file(ref->scen_path, grid, tier);
          s.map_name = map_name;
          scens.push_back(std::move(s));
          ids.push_back(ref->scenario_id);
        } catch (const ParseError& e) {
          if (cb.on_alarm)
            cb.on_alarm("map " + map_name + " tier " + std::to_string(tier) +
                        ": " + e.what());
          exhausted = true;
          break;
        }
      }
      if (exhausted || scens.empty()) break;

      std::vector<Task> tasks;
      std::vector<std::optional<RunRecord>> results;
      for (std::size_t si = 0; si < scens.size(); ++si)
        for (const auto& spec : portfolio) {
          std::string key = ids[si] + "/" + std::to_string(tier) + "/" + spec.id;
          tasks.push_back({&scens[si], ids[si], spec, results.size()});
          results.emplace_back();
          if (done.count(key)) {
            // mark pre-done tasks so the pool skips them but the stop rule
            // still sees their outcome from the log
            tasks.back().slot = static_cast<std::size_t>(-1);
          }
        }

      std::atomic<std::size_t> next{0};
      auto worker_fn = [&]() {
        while (true) {
          std::size_t i = next.fetch_add(1);
          if (i >= tasks.size()) break;
          if (tasks[i].slot == static_cast<std::size_t>(-1)) continue;
          results[tasks[i].slot] =
              run_task(*tasks[i].scn, tasks[i].scenario_id, tasks[i].spec);
        }
      };
      if (workers == 1) {
        worker_fn();
      } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < workers; ++w) pool.emplace_back(worker_fn);
        for (auto& t : pool) t.join();
      }

      // single serialized sink, deterministic (scenario, solver) order
      for (const auto& rec : results) {
        if (!rec) continue;
        log << rec->to_line() << "\n";
        log.flush();
        done.insert(rec->scenario_id + "/" + std::to_string(rec->agent_count) +
                    "/" + rec->solver_id);
        if (cb.on_record) cb.on_record(*rec);
      }

      // stop rule: per-scenario surviving counts from the full log state
      std::map<std::string, int> survivors;
      for (const auto& rec : read_record_log(log_path))
        if (rec.map_name == map_name && rec.agent_count == tier && rec.success)
          ++survivors[rec.scenario_id];
      bool stop = true;
      for (const auto& id : ids)
        if (survivors[id] > plan.min_surviving_solvers) stop = false;

      // checkpoint: last fully-written (map, tier)
      {
        std::ofstream ck(log_path + ".checkpoint");
        ck << map_name << " " << tier << "\n";
      }
      if (cb.on_tier_done) cb.on_tier_done(map_name, tier);
      if (stop) break;
    }
  }
}

std::vector<RunRecord> read_record_log(const std::string& path) {
  std::vector<RunRecord> records;
  std::ifstream in(path);
  if (!in) return records;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (auto rec = RunRecord::from_line(line)) records.push_back(*rec);
  }
  return records;
}

void write_records_csv(const std::vector<RunRecord>& records,
                       const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "map,scenario,agents,solver,time_s,cost,success,seed\n";
  for (const auto& rec : records) {
    out << rec.map_name << "," << rec.scenario_id << "," << rec.agent_count
        << "," << rec.solver_id << "," << fmt_time(rec.time_s) << ","
        << (rec.cost ? std::to_string(*rec.cost) : std::string()) << ","
        << (rec.success ? 1 : 0) << "," << rec.seed << "\n";
  }
}

}  // namespace mapfsel
