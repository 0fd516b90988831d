#include "engines.hpp"
#include "spacetime_astar.hpp"

namespace mapfsel::detail {

// Prioritized planning: agents plan one by one in index order with
// space-time A* over a reservation table of all earlier paths (including
// their permanent goal occupancy). No restarts.
SolveResult solve_pp(const Scenario& scn, Budget& budget) {
  const Grid& g = *scn.grid;
  const int n = scn.agent_count();
  SolveResult res;
  res.solution.paths.resize(n);

  PathConstraints table(g);
  for (int i = 0; i < n; ++i) {
    std::vector<int> dist = bfs_distance(g, scn.agents[i].goal).dist;
    const int horizon = table.latest() + g.size() + 1;
    AstarResult r = spacetime_astar(g, scn.agents[i].start, scn.agents[i].goal,
                                    dist, table, budget, horizon);
    if (!r.path) {
      res.status = budget.expired() ? SolveStatus::TIMEOUT : SolveStatus::FAILURE;
      return res;
    }
    table.reserve_path(g, *r.path);
    res.solution.paths[i] = std::move(*r.path);
  }
  res.status = SolveStatus::SOLVED;
  finalize_solution(res.solution);
  return res;
}

}  // namespace mapfsel::detail
