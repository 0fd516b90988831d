#include "mapfsel/ensembles.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "mapfsel/simd/kernels.hpp"

namespace mapfsel {
namespace {

constexpr double kRescaleThreshold = 1e250;

std::vector<double> passable_mask(const Grid& g) {
  std::vector<double> mask(g.size());
  const auto& blocked = g.blocked_mask();
  for (int i = 0; i < g.size(); ++i) mask[i] = blocked[i] ? 0.0 : 1.0;
  return mask;
}

// Runs the walk DP from `origin` for `L` steps, renormalizing planes that
// approach double overflow.
void run_dp(const Grid& g, Cell origin, int L,
            std::vector<std::vector<double>>& planes,
            std::vector<double>& log_scale) {
  const auto& k = simd::active();
  std::vector<double> mask = passable_mask(g);
  planes.assign(L + 1, std::vector<double>(g.size(), 0.0));
  log_scale.assign(L + 1, 0.0);
  planes[0][g.index(origin)] = 1.0;
  for (int t = 1; t <= L; ++t) {
    k.stencil_step(planes[t - 1].data(), planes[t].data(), mask.data(),
                   static_cast<std::size_t>(g.width()),
                   static_cast<std::size_t>(g.height()));
    log_scale[t] = log_scale[t - 1];
    double m = *std::max_element(planes[t].begin(), planes[t].end());
    if (m > kRescaleThreshold) {
      k.scale(planes[t].data(), 1.0 / m, planes[t].size());
      log_scale[t] += std::log(m);
    }
  }
}

}  // namespace

double WalkCounts::total() const {
  // exact (integer) when no rescaling fired; exp(log) only afterwards
  if (backward_log_scale.empty() || backward_log_scale[0] == 0.0)
    return total_raw;
  return std::exp(log_total);
}

WalkCounts walk_counts(const Grid& grid, Cell start, Cell goal, int L) {
  if (!grid.passable(start) || !grid.passable(goal))
    throw std::invalid_argument("walk_counts: endpoint on a blocked cell");
  DistanceField df = bfs_distance(grid, start);
  int dist = df.at(grid, goal);
  if (dist == kUnreachable)
    throw std::invalid_argument("walk_counts: goal unreachable");
  if (L < dist)
    throw std::invalid_argument("walk_counts: L below the shortest distance");

  WalkCounts wc;
  wc.length = L;
  // Backward planes come from a DP rooted at the goal: sequences of length
  // L-t from c to goal equal sequences of length L-t from goal to c (the
  // action set is symmetric).
  std::vector<std::vector<double>> from_goal;
  std::vector<double> from_goal_log;
  run_dp(grid, start, L, wc.forward, wc.forward_log_scale);
  run_dp(grid, goal, L, from_goal, from_goal_log);
  wc.backward.resize(L + 1);
  wc.backward_log_scale.resize(L + 1);
  for (int t = 0; t <= L; ++t) {
    wc.backward[t] = std::move(from_goal[L - t]);
    wc.backward_log_scale[t] = from_goal_log[L - t];
  }
  // Total walks = backward count at (start, 0).
  double v = wc.backward[0][grid.index(start)];
  wc.total_raw = v;
  wc.log_total = (v > 0 ? std::log(v) : -std::numeric_limits<double>::infinity()) +
                 wc.backward_log_scale[0];
  return wc;
}

std::vector<std::vector<double>> occupancy_field(const Grid& grid, Cell start,
                                                 Cell goal,
                                                 bool include_suboptimal) {
  const auto& k = simd::active();
  DistanceField df = bfs_distance(grid, start);
  int dist = df.at(grid, goal);
  if (dist == kUnreachable)
    throw std::invalid_argument("occupancy_field: goal unreachable");

  std::vector<int> lengths{dist};
  if (include_suboptimal) lengths.push_back(dist + 1);
  const int horizon = lengths.back();

  std::vector<WalkCounts> dps;
  dps.reserve(lengths.size());
  for (int L : lengths) dps.push_back(walk_counts(grid, start, goal, L));

  // Relative ensemble weights via log-sum-exp over the per-length totals.
  double log_max = dps[0].log_total;
  for (const auto& dp : dps) log_max = std::max(log_max, dp.log_total);
  std::vector<double> weight(dps.size());
  double denom = 0.0;
  for (size_t i = 0; i < dps.size(); ++i) {
    weight[i] = std::exp(dps[i].log_total - log_max);
    denom += weight[i];
  }
  for (double& w : weight) w /= denom;

  std::vector<std::vector<double>> occ(horizon + 1,
                                       std::vector<double>(grid.size(), 0.0));
  std::vector<double> prod(grid.size());
  for (size_t i = 0; i < dps.size(); ++i) {
    const WalkCounts& dp = dps[i];
    for (int t = 0; t <= dp.length; ++t) {
      // occ within one length: fwd*bwd normalized per-timestep (the plane
      // scales cancel inside the ratio).
      std::fill(prod.begin(), prod.end(), 0.0);
      k.fma_acc(prod.data(), dp.forward[t].data(), dp.backward[t].data(),
                prod.size());
      double tot = 0.0;
      for (double v : prod) tot += v;
      if (tot <= 0.0) continue;
      k.scale(prod.data(), weight[i] / tot, prod.size());
      for (int c = 0; c < grid.size(); ++c) occ[t][c] += prod[c];
    }
  }
  return occ;
}

CanonicalPath canonical_path(const Grid& grid, Cell start, Cell goal) {
  DistanceField to_goal = bfs_distance(grid, goal);
  if (to_goal.at(grid, start) == kUnreachable)
    throw std::invalid_argument("canonical_path: goal unreachable");
  CanonicalPath path;
  path.cells.push_back(start);
  Cell cur = start;
  while (!(cur == goal)) {
    int d = to_goal.at(grid, cur);
    Cell next = cur;
    bool found = false;
    grid.for_neighbors(cur, [&](Cell n) {
      if (!found && to_goal.at(grid, n) == d - 1) {
        next = n;
        found = true;
      }
    });
    cur = next;
    path.cells.push_back(cur);
  }
  return path;
}

Heatmap heatmap_canonical_visits(const Scenario& scn) {
  const Grid& g = *scn.grid;
  Heatmap hm{4, std::vector<double>(g.size(), 0.0)};
  for (int i = 0; i < scn.agent_count(); ++i) {
    CanonicalPath p = canonical_path(g, scn.agents[i].start, scn.agents[i].goal);
    for (Cell c : p.cells) hm.value[g.index(c)] += 1.0;
  }
  return hm;
}

Heatmap heatmap_pairwise_conflicts(const Scenario& scn, bool include_suboptimal) {
  const auto& k = simd::active();
  const Grid& g = *scn.grid;
  Heatmap hm{include_suboptimal ? 6 : 5, std::vector<double>(g.size(), 0.0)};
  const int n = scn.agent_count();
  if (n < 2) return hm;

  std::vector<std::vector<std::vector<double>>> occ(n);
  for (int i = 0; i < n; ++i)
    occ[i] = occupancy_field(g, scn.agents[i].start, scn.agents[i].goal,
                             include_suboptimal);

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      // occupancy is zero past each agent's own horizon, so summing to the
      // shorter horizon covers every nonzero product
      size_t T = std::min(occ[i].size(), occ[j].size());
      for (size_t t = 0; t < T; ++t)
        k.fma_acc(hm.value.data(), occ[i][t].data(), occ[j][t].data(),
                  hm.value.size());
    }
  }
  return hm;
}

Heatmap heatmap_all_shortest_visits(const Scenario& scn, bool normalized) {
  const auto& k = simd::active();
  const Grid& g = *scn.grid;
  Heatmap hm{7, std::vector<double>(g.size(), 0.0)};
  for (int i = 0; i < scn.agent_count(); ++i) {
    if (normalized) {
      auto occ = occupancy_field(g, scn.agents[i].start, scn.agents[i].goal,
                                 /*include_suboptimal=*/false);
      for (const auto& plane : occ)
        for (int c = 0; c < g.size(); ++c) hm.value[c] += plane[c];
    } else {
      WalkCounts wc = walk_counts(g, scn.agents[i].start, scn.agents[i].goal,
                                  bfs_distance(g, scn.agents[i].start)
                                      .at(g, scn.agents[i].goal));
      for (int t = 0; t <= wc.length; ++t)
        k.fma_acc(hm.value.data(), wc.forward[t].data(), wc.backward[t].data(),
                  hm.value.size());
    }
  }
  return hm;
}

}  // namespace mapfsel
