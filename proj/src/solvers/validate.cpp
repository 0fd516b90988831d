#include <algorithm>
#include <string>

#include "engines.hpp"
#include "spacetime_astar.hpp"

namespace mapfsel {

ValidationReport validate(const Solution& sol, const Scenario& scn) {
  using detail::position_at;
  ValidationReport rep;
  const Grid& g = *scn.grid;
  const int n = scn.agent_count();
  auto add = [&](Violation::Kind kind, int a, int b, int t, std::string what) {
    rep.violations.push_back({kind, a, b, t, std::move(what)});
  };

  if (static_cast<int>(sol.paths.size()) != n) {
    add(Violation::Kind::BAD_ENDPOINT, -1, -1, -1, "path count mismatch");
    return rep;
  }

  long long expected_soc = 0;
  for (int i = 0; i < n; ++i) {
    const auto& p = sol.paths[i];
    if (p.empty() || !(p.front() == scn.agents[i].start)) {
      add(Violation::Kind::BAD_ENDPOINT, i, -1, 0, "path does not start at start");
      continue;
    }
    if (!(p.back() == scn.agents[i].goal)) {
      add(Violation::Kind::BAD_ENDPOINT, i, -1,
          static_cast<int>(p.size()) - 1, "path does not end at goal");
      continue;
    }
    for (std::size_t t = 0; t < p.size(); ++t) {
      if (!g.passable(p[t])) {
        add(Violation::Kind::BAD_MOVE, i, -1, static_cast<int>(t),
            "cell blocked or out of bounds");
        break;
      }
      if (t > 0) {
        int dr = std::abs(p[t].row - p[t - 1].row);
        int dc = std::abs(p[t].col - p[t - 1].col);
        if (dr + dc > 1) {
          add(Violation::Kind::BAD_MOVE, i, -1, static_cast<int>(t),
              "cells not 4-adjacent");
          break;
        }
      }
    }
    // arrival = last timestep after which the agent never leaves its goal
    int arrival = static_cast<int>(p.size()) - 1;
    while (arrival > 0 && p[arrival - 1] == scn.agents[i].goal) --arrival;
    expected_soc += arrival;
  }
  if (rep.ok() && sol.sum_of_costs != expected_soc)
    add(Violation::Kind::BAD_COST, -1, -1, -1,
        "sum_of_costs " + std::to_string(sol.sum_of_costs) + " != " +
            std::to_string(expected_soc));

  std::size_t makespan = 0;
  for (const auto& p : sol.paths) makespan = std::max(makespan, p.size());
  for (int t = 0; t < static_cast<int>(makespan); ++t) {
    for (int i = 0; i < n; ++i) {
      if (sol.paths[i].empty()) continue;
      for (int j = i + 1; j < n; ++j) {
        if (sol.paths[j].empty()) continue;
        Cell pi = position_at(sol.paths[i], t);
        Cell pj = position_at(sol.paths[j], t);
        if (pi == pj)
          add(Violation::Kind::VERTEX, i, j, t,
              "both at (" + std::to_string(pi.row) + "," +
                  std::to_string(pi.col) + ")");
        if (t > 0 && position_at(sol.paths[i], t - 1) == pj &&
            position_at(sol.paths[j], t - 1) == pi && !(pi == pj))
          add(Violation::Kind::EDGE, i, j, t, "swap between adjacent cells");
      }
    }
  }
  return rep;
}

}  // namespace mapfsel
