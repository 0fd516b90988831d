#pragma once
// Shared single-agent space-time A* (plain and focal) over a constraint /
// reservation table. Low level for CBS and ECBS, planner for PP.

#include <functional>
#include <limits>
#include <optional>
#include <unordered_set>
#include <vector>

#include "mapfsel/grid.hpp"
#include "mapfsel/solvers.hpp"

namespace mapfsel::detail {

constexpr int kNever = std::numeric_limits<int>::max();

class PathConstraints {
 public:
  explicit PathConstraints(const Grid& g)
      : ncells_(g.size()), permanent_(g.size(), kNever), last_vertex_(g.size(), -1) {}

  void add_vertex(int cell, int t);
  // Move from -> to arriving at timestep t.
  void add_edge(int from, int to, int t);
  // Cell occupied forever from timestep t on.
  void add_permanent(int cell, int t);
  // Reserves a full path: vertices, edges, and permanent goal occupancy
  // from the arrival time on.
  void reserve_path(const Grid& g, const std::vector<Cell>& path);

  bool vertex_blocked(int cell, int t) const;
  bool edge_blocked(int from, int to, int t) const;
  int permanent_from(int cell) const { return permanent_[cell]; }
  // Last finite timestep with a vertex constraint on the cell.
  int last_vertex_time(int cell) const { return last_vertex_[cell]; }
  int latest() const { return latest_; }

 private:
  long long vkey(int cell, int t) const {
    return static_cast<long long>(t) * ncells_ + cell;
  }
  long long ekey(int from, int to, int t) const {
    return (static_cast<long long>(t) * ncells_ + from) * ncells_ + to;
  }
  int ncells_;
  std::unordered_set<long long> vertex_;
  std::unordered_set<long long> edge_;
  std::vector<int> permanent_;
  std::vector<int> last_vertex_;
  int latest_ = -1;
};

// Extra conflicts incurred by a move from -> to arriving at timestep t
// (focal tie-breaking only; never prunes).
using ConflictCounter = std::function<int(int from, int to, int t)>;

struct AstarResult {
  std::optional<std::vector<Cell>> path;  // t-indexed, ends at goal on arrival
  int f_min = 0;  // lower bound on the optimal arrival time
};

// focal_w <= 1 runs plain A*; otherwise focal search returning a path with
// cost <= focal_w * f_min, tie-broken by the conflict counter.
AstarResult spacetime_astar(const Grid& grid, Cell start, Cell goal,
                            const std::vector<int>& dist_to_goal,
                            const PathConstraints& ct, Budget& budget,
                            int horizon, double focal_w = 0.0,
                            const ConflictCounter* counter = nullptr);

// Position with post-goal extension: agents park on their last cell.
inline Cell position_at(const std::vector<Cell>& path, int t) {
  if (path.empty()) return {};
  return path[std::min<std::size_t>(t, path.size() - 1)];
}

}  // namespace mapfsel::detail
