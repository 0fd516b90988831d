#include <algorithm>
#include <array>
#include <cstdint>
#include <queue>
#include <stdexcept>
#include <unordered_map>

#include "engines.hpp"
#include "spacetime_astar.hpp"

namespace mapfsel {
namespace {

// Joint state: one cell per agent plus, per agent, the number of
// consecutive timesteps it has been waiting on its goal. Goal-waits cost 0
// but are repaid in full if the agent leaves again, so g always equals the
// sum of (eventual) arrival times.
struct JointState {
  std::array<int8_t, 3> cell{};
  std::array<int8_t, 3> idle{};
};

uint64_t pack(const JointState& s, int n) {
  uint64_t key = 0;
  for (int i = 0; i < n; ++i) {
    key = key << 7 | static_cast<uint8_t>(s.cell[i]);
    key = key << 7 | static_cast<uint8_t>(s.idle[i]);
  }
  return key;
}

}  // namespace

std::optional<Solution> joint_state_optimal(const Scenario& scn, int horizon) {
  const Grid& g = *scn.grid;
  const int n = scn.agent_count();
  if (n > 3 || g.width() > 6 || g.height() > 6)
    throw std::invalid_argument(
        "joint_state_optimal: oracle limited to <=3 agents on <=6x6 grids");
  const int idle_cap = 100;

  std::vector<std::vector<int>> dist(n);
  std::vector<int> goal_idx(n);
  for (int i = 0; i < n; ++i) {
    dist[i] = bfs_distance(g, scn.agents[i].goal).dist;
    goal_idx[i] = g.index(scn.agents[i].goal);
  }

  JointState start{};
  for (int i = 0; i < n; ++i)
    start.cell[i] = static_cast<int8_t>(g.index(scn.agents[i].start));

  auto heuristic = [&](const JointState& s) {
    int h = 0;
    for (int i = 0; i < n; ++i) h += dist[i][s.cell[i]];
    return h;
  };

  struct Entry {
    int f, g_cost;
    long long seq;
    uint64_t key;
  };
  auto cmp = [](const Entry& a, const Entry& b) {
    if (a.f != b.f) return a.f > b.f;
    if (a.g_cost != b.g_cost) return a.g_cost < b.g_cost;
    return a.seq > b.seq;
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(cmp)> open(cmp);
  struct Record {
    JointState state;
    int g_cost;
    uint64_t parent;
    bool closed;
  };
  std::unordered_map<uint64_t, Record> seen;

  const uint64_t start_key = pack(start, n);
  seen[start_key] = {start, 0, start_key, false};
  long long seq = 0;
  open.push({heuristic(start), 0, seq++, start_key});

  long long expansions = 0;
  const long long max_expansions = 4'000'000;

  while (!open.empty()) {
    Entry e = open.top();
    open.pop();
    Record& rec = seen[e.key];
    if (rec.closed || e.g_cost > rec.g_cost) continue;
    rec.closed = true;
    const JointState s = rec.state;

    bool done = true;
    for (int i = 0; i < n; ++i)
      if (s.cell[i] != goal_idx[i]) done = false;
    if (done) {
      // reconstruct joint cell trajectories
      std::vector<JointState> chain;
      uint64_t k = e.key;
      while (true) {
        const Record& r = seen[k];
        chain.push_back(r.state);
        if (r.parent == k) break;
        k = r.parent;
      }
      std::reverse(chain.begin(), chain.end());
      Solution sol;
      sol.paths.resize(n);
      for (int i = 0; i < n; ++i)
        for (const JointState& js : chain)
          sol.paths[i].push_back(g.cell(js.cell[i]));
      detail::finalize_solution(sol);
      return sol;
    }

    if (++expansions > max_expansions) return std::nullopt;
    if (e.g_cost > horizon * n) continue;

    // enumerate joint moves, 5 per agent
    std::array<std::vector<int>, 3> moves;
    for (int i = 0; i < n; ++i) {
      Cell c = g.cell(s.cell[i]);
      g.for_neighbors(c, [&](Cell nc) { moves[i].push_back(g.index(nc)); });
      moves[i].push_back(s.cell[i]);
    }
    std::array<int, 3> choice{};
    auto recurse = [&](auto&& self, int agent) -> void {
      if (agent == n) {
        // pairwise vertex / edge checks
        for (int i = 0; i < n; ++i)
          for (int j = i + 1; j < n; ++j) {
            if (choice[i] == choice[j]) return;
            if (choice[i] == s.cell[j] && choice[j] == s.cell[i]) return;
          }
        JointState ns{};
        int step_cost = 0;
        for (int i = 0; i < n; ++i) {
          ns.cell[i] = static_cast<int8_t>(choice[i]);
          bool was_home = s.cell[i] == goal_idx[i];
          bool stays = choice[i] == s.cell[i];
          if (was_home && stays) {
            ns.idle[i] = static_cast<int8_t>(std::min<int>(s.idle[i] + 1, idle_cap));
          } else if (was_home && !stays) {
            step_cost += 1 + s.idle[i];  // repay the free goal-waits
            ns.idle[i] = 0;
          } else {
            step_cost += 1;
            ns.idle[i] = 0;
          }
        }
        int ng = e.g_cost + step_cost;
        uint64_t nk = pack(ns, n);
        auto it = seen.find(nk);
        if (it == seen.end() || ng < it->second.g_cost) {
          seen[nk] = {ns, ng, e.key, false};
          open.push({ng + heuristic(ns), ng, seq++, nk});
        }
        return;
      }
      for (int m : moves[agent]) {
        choice[agent] = m;
        self(self, agent + 1);
      }
    };
    recurse(recurse, 0);
  }
  return std::nullopt;
}

}  // namespace mapfsel
