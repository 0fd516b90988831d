#include <algorithm>
#include <memory>
#include <queue>

#include "engines.hpp"
#include "spacetime_astar.hpp"

namespace mapfsel::detail {
namespace {

struct Constraint {
  int agent;
  bool is_edge;
  int cell;        // vertex constraint, or move target for edges
  int from;        // edge source (edges only)
  int t;
  std::shared_ptr<Constraint> parent;
};

struct Conflict {
  bool found = false;
  bool is_edge = false;
  int a = -1, b = -1;
  int t = -1;
  Cell cell_a, cell_b;  // vertex: cell_a only; edge: a moved cell_b->cell_a
};

struct CTNode {
  std::vector<std::vector<Cell>> paths;
  std::vector<int> f_mins;  // per-agent low-level lower bounds (ECBS)
  long long cost = 0;
  long long lb = 0;
  int conflicts = 0;
  long long seq = 0;
  std::shared_ptr<Constraint> constraint;
};

Conflict first_conflict(const std::vector<std::vector<Cell>>& paths) {
  Conflict cf;
  std::size_t makespan = 0;
  for (const auto& p : paths) makespan = std::max(makespan, p.size());
  const int n = static_cast<int>(paths.size());
  for (int t = 0; t < static_cast<int>(makespan); ++t) {
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) {
        Cell pi = position_at(paths[i], t);
        Cell pj = position_at(paths[j], t);
        if (pi == pj) {
          cf.found = true;
          cf.a = i;
          cf.b = j;
          cf.t = t;
          cf.cell_a = pi;
          return cf;
        }
        if (t > 0 && position_at(paths[i], t - 1) == pj &&
            position_at(paths[j], t - 1) == pi) {
          cf.found = true;
          cf.is_edge = true;
          cf.a = i;
          cf.b = j;
          cf.t = t;
          cf.cell_a = pi;                          // a arrives here at t
          cf.cell_b = position_at(paths[i], t - 1);  // from
          return cf;
        }
      }
    }
  }
  return cf;
}

int count_conflicts(const std::vector<std::vector<Cell>>& paths) {
  std::size_t makespan = 0;
  for (const auto& p : paths) makespan = std::max(makespan, p.size());
  const int n = static_cast<int>(paths.size());
  int count = 0;
  for (int t = 0; t < static_cast<int>(makespan); ++t)
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) {
        if (position_at(paths[i], t) == position_at(paths[j], t)) ++count;
        if (t > 0 && position_at(paths[i], t - 1) == position_at(paths[j], t) &&
            position_at(paths[j], t - 1) == position_at(paths[i], t))
          ++count;
      }
  return count;
}

PathConstraints constraints_for(const Grid& g, int agent,
                                const std::shared_ptr<Constraint>& chain) {
  PathConstraints ct(g);
  for (const Constraint* c = chain.get(); c; c = c->parent.get()) {
    if (c->agent != agent) continue;
    if (c->is_edge)
      ct.add_edge(c->from, c->cell, c->t);
    else
      ct.add_vertex(c->cell, c->t);
  }
  return ct;
}

// Counts conflicts a candidate move adds against the other agents' current
// paths (ECBS low-level focal tie-breaking).
ConflictCounter make_counter(const Grid& g,
                             const std::vector<std::vector<Cell>>& paths,
                             int self) {
  return [&g, &paths, self](int from, int to, int t) {
    int count = 0;
    for (std::size_t j = 0; j < paths.size(); ++j) {
      if (static_cast<int>(j) == self || paths[j].empty()) continue;
      Cell now = position_at(paths[j], t);
      if (g.index(now) == to) ++count;
      Cell prev = position_at(paths[j], t - 1);
      if (to != from && g.index(prev) == to && g.index(now) == from) ++count;
    }
    return count;
  };
}

}  // namespace

SolveResult solve_cbs(const Scenario& scn, Budget& budget, double w) {
  const Grid& g = *scn.grid;
  const int n = scn.agent_count();
  const bool focal = w > 1.0;
  SolveResult res;

  std::vector<std::vector<int>> dist(n);
  for (int i = 0; i < n; ++i)
    dist[i] = bfs_distance(g, scn.agents[i].goal).dist;

  auto replan = [&](CTNode& node, int agent) -> bool {
    PathConstraints ct = constraints_for(g, agent, node.constraint);
    const int horizon = ct.latest() + g.size() + 1;
    // The counter also feeds CBS (w == 1): among equal-cost optimal paths the
    // low level prefers the one with fewest conflicts, which keeps the
    // constraint tree small without giving up optimality.
    ConflictCounter counter = make_counter(g, node.paths, agent);
    const ConflictCounter* cptr = &counter;
    AstarResult r =
        spacetime_astar(g, scn.agents[agent].start, scn.agents[agent].goal,
                        dist[agent], ct, budget, horizon, w, cptr);
    if (!r.path) return false;
    node.paths[agent] = std::move(*r.path);
    node.f_mins[agent] = r.f_min;
    return true;
  };

  long long seq = 0;
  CTNode root;
  root.paths.resize(n);
  root.f_mins.assign(n, 0);
  for (int i = 0; i < n; ++i) {
    if (!replan(root, i)) {
      res.status = budget.expired() ? SolveStatus::TIMEOUT : SolveStatus::FAILURE;
      return res;
    }
  }
  auto refresh = [](CTNode& node) {
    node.cost = 0;
    node.lb = 0;
    for (const auto& p : node.paths)
      node.cost += static_cast<long long>(p.size()) - 1;
    for (int f : node.f_mins) node.lb += f;
    node.conflicts = count_conflicts(node.paths);
  };
  refresh(root);
  root.seq = seq++;

  // CBS: best-first on (cost, conflicts, FIFO). ECBS: focal over the lb
  // frontier, picked by fewest conflicts. Open is a plain vector; instance
  // sizes here stay small enough for linear scans.
  std::vector<CTNode> open;
  open.push_back(std::move(root));

  while (!open.empty()) {
    if (!budget.tick()) {
      res.status = SolveStatus::TIMEOUT;
      return res;
    }
    std::size_t pick = 0;
    if (focal) {
      long long lb_min = open[0].lb;
      for (const auto& node : open) lb_min = std::min(lb_min, node.lb);
      double bound = w * static_cast<double>(lb_min);
      pick = open.size();
      for (std::size_t i = 0; i < open.size(); ++i) {
        if (static_cast<double>(open[i].cost) > bound) continue;
        if (pick == open.size() ||
            std::tie(open[i].conflicts, open[i].cost, open[i].seq) <
                std::tie(open[pick].conflicts, open[pick].cost, open[pick].seq))
          pick = i;
      }
    } else {
      for (std::size_t i = 1; i < open.size(); ++i)
        if (std::tie(open[i].cost, open[i].conflicts, open[i].seq) <
            std::tie(open[pick].cost, open[pick].conflicts, open[pick].seq))
          pick = i;
    }

    CTNode node = std::move(open[pick]);
    open.erase(open.begin() + pick);

    Conflict cf = first_conflict(node.paths);
    if (!cf.found) {
      res.status = SolveStatus::SOLVED;
      res.solution.paths = std::move(node.paths);
      finalize_solution(res.solution);
      return res;
    }

    std::vector<CTNode> children;
    bool bypassed = false;
    for (int side = 0; side < 2 && !bypassed; ++side) {
      const int agent = side == 0 ? cf.a : cf.b;
      auto c = std::make_shared<Constraint>();
      c->agent = agent;
      c->t = cf.t;
      c->parent = node.constraint;
      if (cf.is_edge) {
        c->is_edge = true;
        if (side == 0) {  // a moved cell_b -> cell_a
          c->from = g.index(cf.cell_b);
          c->cell = g.index(cf.cell_a);
        } else {  // b moved cell_a -> cell_b
          c->from = g.index(cf.cell_a);
          c->cell = g.index(cf.cell_b);
        }
      } else {
        c->is_edge = false;
        c->cell = g.index(cf.cell_a);
      }
      CTNode child;
      child.paths = node.paths;
      child.f_mins = node.f_mins;
      child.constraint = std::move(c);
      if (!replan(child, agent)) {
        if (budget.expired()) {
          res.status = SolveStatus::TIMEOUT;
          return res;
        }
        continue;  // no path under this constraint set
      }
      refresh(child);
      // Conflict bypass: a replanned path of equal cost with strictly fewer
      // conflicts is adopted by the current node instead of branching. The
      // node keeps its own constraint set and f_mins, so both the CBS
      // optimality argument and the ECBS lower bound are unaffected.
      if (child.cost == node.cost && child.conflicts < node.conflicts) {
        node.paths = std::move(child.paths);
        node.cost = child.cost;
        node.conflicts = child.conflicts;
        node.seq = seq++;
        open.push_back(std::move(node));
        bypassed = true;
        break;
      }
      child.seq = seq++;
      children.push_back(std::move(child));
    }
    if (!bypassed)
      for (auto& child : children) open.push_back(std::move(child));
  }
  res.status = budget.expired() ? SolveStatus::TIMEOUT : SolveStatus::FAILURE;
  return res;
}

}  // namespace mapfsel::detail
