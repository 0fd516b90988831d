#pragma once
// The candidate-solver portfolio behind one contract: CBS (optimal),
// ECBS(w) (bounded suboptimal), PP (prioritized planning) and PIBT, plus a
// solution validator and a joint-state optimal oracle for testing.

#include <chrono>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mapfsel/grid.hpp"

namespace mapfsel {

enum class SolverKind { CBS, ECBS, PP, PIBT };

struct SolverSpec {
  SolverKind kind = SolverKind::CBS;
  double w = 0.0;      // suboptimality factor, ECBS only (w >= 1)
  std::string id;      // display string, e.g. "ecbs:1.05"

  // Accepts "cbs", "pp", "pibt", "ecbs:<w>".
  static SolverSpec parse(const std::string& s);
};

struct Solution {
  // One cell per timestep from t=0; each path ends at its goal at the
  // agent's arrival time (trailing goal-waits trimmed).
  std::vector<std::vector<Cell>> paths;
  long long sum_of_costs = 0;
};

enum class SolveStatus { SOLVED, TIMEOUT, FAILURE };

struct SolveResult {
  SolveStatus status = SolveStatus::FAILURE;
  Solution solution;  // valid only when status == SOLVED
};

// Wall-clock budgets drive dataset builds; deterministic expansion budgets
// drive CI. A solve call polls tick() from its inner loops and aborts once
// the budget is spent.
class Budget {
 public:
  static Budget wall_clock(double seconds);
  static Budget expansions(long long max_expansions);

  // Charges one unit of work; returns false once the budget is exhausted.
  bool tick();
  bool expired() const { return expired_; }
  long long used() const { return used_; }

 private:
  bool wall_mode_ = false;
  std::chrono::steady_clock::time_point deadline_{};
  long long max_ = 0;
  long long used_ = 0;
  bool expired_ = false;
};

SolveResult solve(const SolverSpec& spec, const Scenario& scn, Budget& budget,
                  uint64_t seed);

struct Violation {
  enum class Kind { VERTEX, EDGE, BAD_ENDPOINT, BAD_MOVE, BAD_COST };
  Kind kind;
  int agent_a = -1;
  int agent_b = -1;
  int timestep = -1;
  std::string detail;
};

struct ValidationReport {
  std::vector<Violation> violations;
  bool ok() const { return violations.empty(); }
};

ValidationReport validate(const Solution& sol, const Scenario& scn);

// Exhaustive A* over the joint configuration space, minimizing sum of
// costs. Test oracle only: enforces <= 3 agents and grids <= 6x6.
std::optional<Solution> joint_state_optimal(const Scenario& scn, int horizon);

// Adapter for out-of-tree solvers: spawns `command scenario_file agents
// time_limit seed` and reads one line "time_ms cost success" from stdout.
struct ExternalSolverAdapter {
  std::string command;
  struct Outcome {
    double time_ms = 0.0;
    long long cost = 0;
    bool success = false;
  };
  std::optional<Outcome> run(const std::string& scenario_path, int agents,
                             double time_limit_s, uint64_t seed) const;
};

}  // namespace mapfsel
