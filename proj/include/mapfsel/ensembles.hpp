#pragma once
// Shortest-path and 1-suboptimal-path combinatorics behind feature channels
// 4-7: canonical paths, forward/backward walk-count DPs, visit heatmaps and
// pairwise conflict heatmaps.
//
// The walk DP counts action sequences over {up, down, left, right, wait}.
// At L = dist a completed walk cannot contain a wait, so the count equals
// the number of simple shortest paths. Planes are renormalized on the fly
// (with the applied factor tracked in log space) so that occupancy
// probabilities stay finite on large open maps where raw counts overflow.

#include <vector>

#include "mapfsel/grid.hpp"

namespace mapfsel {

struct CanonicalPath {
  int agent = 0;
  std::vector<Cell> cells;  // start..goal, consecutive cells 4-adjacent
  int length() const { return static_cast<int>(cells.size()) - 1; }
};

// Deterministic shortest path: greedy descent on BFS distance to goal,
// ties broken by the grid's fixed neighbor order (up, left, down, right).
CanonicalPath canonical_path(const Grid& grid, Cell start, Cell goal);

struct WalkCounts {
  int length = 0;  // L
  // planes[t][cell]; forward counts sequences of length t from start ending
  // at the cell, backward counts sequences of length L-t from the cell
  // ending at the goal. Stored values are scaled; log_scale[t] is the log of
  // the factor divided out so far (0 until counts near overflow).
  std::vector<std::vector<double>> forward, backward;
  std::vector<double> forward_log_scale, backward_log_scale;
  double log_total = 0.0;  // log of the total number of length-L walks
  double total_raw = 0.0;  // scaled count at (start, t=0)

  // Exact total (finite only at validation scales where no rescaling fired).
  double total() const;
};

// Requires L >= bfs distance from start to goal.
WalkCounts walk_counts(const Grid& grid, Cell start, Cell goal, int L);

// Per-timestep occupancy probabilities over the agent's path ensemble:
// lengths {dist} (include_suboptimal=false) or {dist, dist+1} (true).
// occ[t][cell] = P(a uniformly random ensemble path occupies cell at t),
// zero beyond a path's own horizon (no post-goal occupancy).
std::vector<std::vector<double>> occupancy_field(const Grid& grid, Cell start,
                                                 Cell goal,
                                                 bool include_suboptimal);

struct Heatmap {
  int channel_id = 0;  // 4..7
  std::vector<double> value;  // per cell, zero on blocked cells
};

Heatmap heatmap_canonical_visits(const Scenario& scn);
Heatmap heatmap_pairwise_conflicts(const Scenario& scn, bool include_suboptimal);
// normalized=false gives raw visit counts (validation scales only).
Heatmap heatmap_all_shortest_visits(const Scenario& scn, bool normalized = true);

}  // namespace mapfsel
