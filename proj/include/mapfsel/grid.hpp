#pragma once
// 4-connected grid maps, MovingAI map/scen parsing and single-source BFS
// distance fields. All types here are immutable after construction and safe
// to share across threads.

#include <cstdint>
#include <istream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace mapfsel {

struct Cell {
  int row = 0;
  int col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

class Grid {
 public:
  Grid(int width, int height, std::vector<uint8_t> blocked);

  int width() const { return width_; }
  int height() const { return height_; }
  int size() const { return width_ * height_; }

  int index(Cell c) const { return c.row * width_ + c.col; }
  Cell cell(int idx) const { return {idx / width_, idx % width_}; }

  bool in_bounds(Cell c) const {
    return c.row >= 0 && c.row < height_ && c.col >= 0 && c.col < width_;
  }
  bool blocked(Cell c) const { return blocked_[index(c)] != 0; }
  bool passable(Cell c) const { return in_bounds(c) && !blocked(c); }

  const std::vector<uint8_t>& blocked_mask() const { return blocked_; }

  // Neighbor order is fixed: up, left, down, right. Tie-breaking in the
  // canonical-path rule and the solvers depends on it.
  template <typename Fn>
  void for_neighbors(Cell c, Fn&& fn) const {
    const Cell cand[4] = {{c.row - 1, c.col},
                          {c.row, c.col - 1},
                          {c.row + 1, c.col},
                          {c.row, c.col + 1}};
    for (const Cell& n : cand)
      if (passable(n)) fn(n);
  }

 private:
  int width_;
  int height_;
  std::vector<uint8_t> blocked_;
};

struct AgentTask {
  Cell start;
  Cell goal;
};

struct Scenario {
  const Grid* grid = nullptr;
  std::vector<AgentTask> agents;
  std::string map_name;

  int agent_count() const { return static_cast<int>(agents.size()); }
};

constexpr int kUnreachable = std::numeric_limits<int>::max();

struct DistanceField {
  Cell source;
  std::vector<int> dist;  // kUnreachable for disconnected cells

  int at(const Grid& g, Cell c) const { return dist[g.index(c)]; }
};

// MovingAI .map format: "type octile" / "height H" / "width W" / "map",
// then H rows of W characters. Blocked characters: @ O T W.
Grid parse_map(std::istream& in);
Grid parse_map_file(const std::string& path);

// Serializes back to the same format (round-trips bit-exactly for inputs
// that use '.' and '@' only; other passable/blocked chars normalize).
std::string serialize_map(const Grid& g);

// n == kAllAgents: take every agent in the file.
constexpr int kAllAgents = -1;

// MovingAI .scen format, first n agents in file order. Validates the
// scenario invariants: on-grid passable endpoints, pairwise distinct starts
// and goals, every goal reachable from its start.
Scenario parse_scenario(std::istream& in, const Grid& grid, int n,
                        std::string map_name = {});
Scenario parse_scenario_file(const std::string& path, const Grid& grid, int n);

DistanceField bfs_distance(const Grid& grid, Cell source);

}  // namespace mapfsel
