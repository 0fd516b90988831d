#include "spacetime_astar.hpp"

#include <algorithm>
#include <queue>

namespace mapfsel::detail {

void PathConstraints::add_vertex(int cell, int t) {
  vertex_.insert(vkey(cell, t));
  last_vertex_[cell] = std::max(last_vertex_[cell], t);
  latest_ = std::max(latest_, t);
}

void PathConstraints::add_edge(int from, int to, int t) {
  edge_.insert(ekey(from, to, t));
  latest_ = std::max(latest_, t);
}

void PathConstraints::add_permanent(int cell, int t) {
  permanent_[cell] = std::min(permanent_[cell], t);
  latest_ = std::max(latest_, t);
}

void PathConstraints::reserve_path(const Grid& g, const std::vector<Cell>& path) {
  for (std::size_t t = 0; t < path.size(); ++t) {
    add_vertex(g.index(path[t]), static_cast<int>(t));
    if (t > 0 && !(path[t] == path[t - 1]))
      add_edge(g.index(path[t]), g.index(path[t - 1]), static_cast<int>(t));
  }
  add_permanent(g.index(path.back()), static_cast<int>(path.size()) - 1);
}

bool PathConstraints::vertex_blocked(int cell, int t) const {
  if (t >= permanent_[cell]) return true;
  return vertex_.count(vkey(cell, t)) != 0;
}

bool PathConstraints::edge_blocked(int from, int to, int t) const {
  return edge_.count(ekey(from, to, t)) != 0;
}

namespace {

struct Node {
  int cell;
  int t;
  int g;
  int f;
  int conflicts;       // accumulated focal tie-break count
  long long seq;       // FIFO order
  int parent;          // index into the node arena
};

}  // namespace

AstarResult spacetime_astar(const Grid& grid, Cell start, Cell goal,
                            const std::vector<int>& dist_to_goal,
                            const PathConstraints& ct, Budget& budget,
                            int horizon, double focal_w,
                            const ConflictCounter* counter) {
  AstarResult out;
  const int start_idx = grid.index(start);
  const int goal_idx = grid.index(goal);
  if (dist_to_goal[start_idx] == kUnreachable) return out;
  // Parking forever on the goal is part of the contract; a goal cell that is
  // permanently reserved by someone else admits no arrival time.
  if (ct.permanent_from(goal_idx) != kNever) return out;
  const int goal_clear_time = ct.last_vertex_time(goal_idx);

  std::vector<Node> arena;
  arena.reserve(1024);
  // open holds arena indices; heap ordered by (f, conflicts, -g, seq) so that
  // ties between equal-cost nodes break toward the fewest conflicts.
  auto cmp = [&](int a, int b) {
    if (arena[a].f != arena[b].f) return arena[a].f > arena[b].f;
    if (arena[a].conflicts != arena[b].conflicts)
      return arena[a].conflicts > arena[b].conflicts;
    if (arena[a].g != arena[b].g) return arena[a].g < arena[b].g;
    return arena[a].seq > arena[b].seq;
  };
  std::vector<int> open;
  auto push_open = [&](int idx) {
    open.push_back(idx);
    std::push_heap(open.begin(), open.end(), cmp);
  };

  const bool focal = focal_w > 1.0;
  std::unordered_set<long long> closed;
  auto skey = [&](int cell, int t) {
    return static_cast<long long>(t) * grid.size() + cell;
  };

  long long seq = 0;
  arena.push_back({start_idx, 0, 0, dist_to_goal[start_idx], 0, seq++, -1});
  push_open(0);

  auto reconstruct = [&](int idx) {
    std::vector<Cell> path;
    for (int i = idx; i != -1; i = arena[i].parent)
      path.push_back(grid.cell(arena[i].cell));
    std::reverse(path.begin(), path.end());
    return path;
  };

  while (!open.empty()) {
    if (!budget.tick()) return out;
    int cur;
    if (focal) {
      // f_min from the heap top; select from {f <= w*f_min} the node with
      // fewest conflicts (then smallest f, then FIFO) by linear scan.
      int f_min = arena[open.front()].f;
      double bound = focal_w * f_min;
      std::size_t best = open.size();
      for (std::size_t i = 0; i < open.size(); ++i) {
        const Node& n = arena[open[i]];
        if (n.f > bound) continue;
        if (best == open.size()) {
          best = i;
          continue;
        }
        const Node& b = arena[open[best]];
        if (n.conflicts != b.conflicts ? n.conflicts < b.conflicts
            : n.f != b.f               ? n.f < b.f
                                       : n.seq < b.seq)
          best = i;
      }
      cur = open[best];
      out.f_min = f_min;
      open.erase(open.begin() + best);
      std::make_heap(open.begin(), open.end(), cmp);
    } else {
      std::pop_heap(open.begin(), open.end(), cmp);
      cur = open.back();
      open.pop_back();
      out.f_min = arena[cur].f;
    }

    const Node n = arena[cur];
    if (!closed.insert(skey(n.cell, n.t)).second) continue;
    if (n.cell == goal_idx && n.t > goal_clear_time) {
      out.path = reconstruct(cur);
      return out;
    }
    if (n.t >= horizon) continue;

    const Cell c = grid.cell(n.cell);
    Cell succ[5] = {{c.row - 1, c.col},
                    {c.row, c.col - 1},
                    {c.row + 1, c.col},
                    {c.row, c.col + 1},
                    c};
    for (const Cell& nc : succ) {
      if (!grid.passable(nc)) continue;
      const int ni = grid.index(nc);
      const int nt = n.t + 1;
      if (ct.vertex_blocked(ni, nt)) continue;
      if (ni != n.cell && ct.edge_blocked(n.cell, ni, nt)) continue;
      if (closed.count(skey(ni, nt))) continue;
      if (dist_to_goal[ni] == kUnreachable) continue;
      int conf = n.conflicts;
      if (counter) conf += (*counter)(n.cell, ni, nt);
      arena.push_back(
          {ni, nt, nt, nt + dist_to_goal[ni], conf, seq++, cur});
      push_open(static_cast<int>(arena.size()) - 1);
    }
  }
  return out;
}

}  // namespace mapfsel::detail
