#include <algorithm>
#include <random>

#include "engines.hpp"

namespace mapfsel::detail {
namespace {

struct PibtAgent {
  int id;
  int cell;
  int next = -1;  // -1 while undecided this tick
  int goal;
  int elapsed = 0;   // ticks since last at goal; the dynamic priority
  double tie;        // seeded static tie-breaker
};

}  // namespace

// PIBT: every tick each agent takes one step toward its goal, highest
// dynamic priority first; an agent blocked by a lower-priority one lends it
// its priority (inheritance) and retries other moves when the push fails
// (backtracking). Step cap 4 * height * width ticks, then FAILURE.
SolveResult solve_pibt(const Scenario& scn, Budget& budget, uint64_t seed) {
  const Grid& g = *scn.grid;
  const int n = scn.agent_count();
  SolveResult res;

  std::vector<std::vector<int>> dist(n);
  for (int i = 0; i < n; ++i)
    dist[i] = bfs_distance(g, scn.agents[i].goal).dist;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  std::vector<PibtAgent> agents(n);
  for (int i = 0; i < n; ++i)
    agents[i] = {i, g.index(scn.agents[i].start), -1,
                 g.index(scn.agents[i].goal), 0, uni(rng)};

  std::vector<int> occupied_now(g.size(), -1);
  std::vector<int> occupied_next(g.size(), -1);
  std::vector<std::vector<Cell>> paths(n);
  for (int i = 0; i < n; ++i) paths[i].push_back(g.cell(agents[i].cell));

  // funcPIBT: returns true once agents[ai] has a reserved next cell.
  // parent_cell blocks the move that would swap with the pusher.
  auto func = [&](auto&& self, int ai, int parent_cell) -> bool {
    PibtAgent& a = agents[ai];
    Cell c = g.cell(a.cell);
    std::vector<int> cand;
    g.for_neighbors(c, [&](Cell nc) { cand.push_back(g.index(nc)); });
    cand.push_back(a.cell);
    std::stable_sort(cand.begin(), cand.end(), [&](int x, int y) {
      return dist[ai][x] < dist[ai][y];
    });
    for (int target : cand) {
      if (target == parent_cell) continue;       // would swap with the pusher
      if (occupied_next[target] != -1) continue;  // already claimed
      int other = occupied_now[target];
      // swap conflict: the occupant has already decided to move into my cell
      if (other != -1 && other != ai && agents[other].next == a.cell) continue;
      if (other != -1 && other != ai && agents[other].next == -1) {
        // occupied by an undecided agent: reserve, then try to push it out
        a.next = target;
        occupied_next[target] = ai;
        if (self(self, other, a.cell)) return true;
        a.next = -1;
        occupied_next[target] = -1;
        continue;
      }
      a.next = target;
      occupied_next[target] = ai;
      return true;
    }
    return false;  // every move (including stay) is taken; pusher backtracks
  };

  const long long max_ticks = 4LL * g.width() * g.height();
  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;

  for (long long tick = 0; tick < max_ticks; ++tick) {
    bool all_home = true;
    for (const auto& a : agents)
      if (a.cell != a.goal) all_home = false;
    if (all_home) break;

    if (!budget.tick()) {
      res.status = SolveStatus::TIMEOUT;
      return res;
    }

    std::stable_sort(order.begin(), order.end(), [&](int x, int y) {
      if (agents[x].elapsed != agents[y].elapsed)
        return agents[x].elapsed > agents[y].elapsed;
      return agents[x].tie > agents[y].tie;
    });

    std::fill(occupied_now.begin(), occupied_now.end(), -1);
    std::fill(occupied_next.begin(), occupied_next.end(), -1);
    for (auto& a : agents) {
      a.next = -1;
      occupied_now[a.cell] = a.id;
    }
    for (int id : order)
      if (agents[id].next == -1 && !func(func, id, -1)) {
        // nowhere to go at all: stay put if the cell is still free
        if (occupied_next[agents[id].cell] == -1) {
          agents[id].next = agents[id].cell;
          occupied_next[agents[id].cell] = id;
        } else {
          res.status = SolveStatus::FAILURE;
          return res;
        }
      }

    for (auto& a : agents) {
      a.cell = a.next;
      a.elapsed = a.cell == a.goal ? 0 : a.elapsed + 1;
      paths[a.id].push_back(g.cell(a.cell));
    }
  }

  for (const auto& a : agents) {
    if (a.cell != a.goal) {
      res.status = SolveStatus::FAILURE;  // tick cap hit before completion
      return res;
    }
  }
  res.status = SolveStatus::SOLVED;
  res.solution.paths = std::move(paths);
  finalize_solution(res.solution);
  return res;
}

}  // namespace mapfsel::detail
