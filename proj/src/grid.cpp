#include "mapfsel/grid.hpp"

#include <deque>
#include <fstream>
#include <sstream>

namespace mapfsel {
namespace {

bool is_blocked_char(char ch) {
  return ch == '@' || ch == 'O' || ch == 'T' || ch == 'W';
}

bool is_passable_char(char ch) { return ch == '.' || ch == 'G' || ch == 'S'; }

std::string chomp(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n'))
    line.pop_back();
  return line;
}

[[noreturn]] void fail(int line_no, const std::string& what) {
  throw ParseError("line " + std::to_string(line_no) + ": " + what);
}

}  // namespace

Grid::Grid(int width, int height, std::vector<uint8_t> blocked)
    : width_(width), height_(height), blocked_(std::move(blocked)) {
  if (width_ < 1 || height_ < 1)
    throw ParseError("grid dimensions must be at least 1x1");
  if (blocked_.size() != static_cast<size_t>(width_) * height_)
    throw ParseError("blocked mask size does not match width*height");
}

Grid parse_map(std::istream& in) {
  std::string line;
  int line_no = 0;
  auto next_line = [&]() -> std::string {
    if (!std::getline(in, line)) fail(line_no + 1, "unexpected end of file");
    ++line_no;
    return chomp(line);
  };

  std::string type_line = next_line();
  if (type_line.rfind("type", 0) != 0) fail(line_no, "expected 'type' header");

  auto parse_int_header = [&](const std::string& key) {
    std::string l = next_line();
    std::istringstream ss(l);
    std::string k;
    int v = 0;
    if (!(ss >> k >> v) || k != key || v < 1)
      fail(line_no, "expected '" + key + " <positive int>'");
    return v;
  };
  int height = parse_int_header("height");
  int width = parse_int_header("width");

  if (next_line() != "map") fail(line_no, "expected 'map'");

  std::vector<uint8_t> blocked;
  blocked.reserve(static_cast<size_t>(width) * height);
  for (int r = 0; r < height; ++r) {
    std::string row = next_line();
    if (static_cast<int>(row.size()) != width)
      fail(line_no, "row has " + std::to_string(row.size()) +
                        " characters, expected " + std::to_string(width));
    for (char ch : row) {
      if (is_blocked_char(ch))
        blocked.push_back(1);
      else if (is_passable_char(ch))
        blocked.push_back(0);
      else
        fail(line_no, std::string("unknown map character '") + ch + "'");
    }
  }
  return Grid(width, height, std::move(blocked));
}

Grid parse_map_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open map file: " + path);
  return parse_map(in);
}

std::string serialize_map(const Grid& g) {
  std::ostringstream out;
  out << "type octile\n"
      << "height " << g.height() << "\n"
      << "width " << g.width() << "\n"
      << "map\n";
  for (int r = 0; r < g.height(); ++r) {
    for (int c = 0; c < g.width(); ++c)
      out << (g.blocked({r, c}) ? '@' : '.');
    out << '\n';
  }
  return out.str();
}

Scenario parse_scenario(std::istream& in, const Grid& grid, int n,
                        std::string map_name) {
  if (n < 1 && n != kAllAgents)
    throw ParseError("agent count must be at least 1");
  std::string line;
  if (!std::getline(in, line) || chomp(line).rfind("version", 0) != 0)
    throw ParseError("line 1: expected 'version' header");

  Scenario scen;
  scen.grid = &grid;
  scen.map_name = std::move(map_name);

  auto reject = [](int agent, const std::string& what) {
    throw ParseError("agent " + std::to_string(agent) + ": " + what);
  };

  int agent = 0;
  while ((n == kAllAgents || agent < n) && std::getline(in, line)) {
    std::string l = chomp(line);
    if (l.empty()) continue;
    std::istringstream ss(l);
    int bucket, map_w, map_h, sx, sy, gx, gy;
    std::string name;
    double opt;
    if (!(ss >> bucket >> name >> map_w >> map_h >> sx >> sy >> gx >> gy >> opt))
      reject(agent, "malformed scenario row");
    // .scen stores (col, row)
    Cell start{sy, sx};
    Cell goal{gy, gx};
    if (!grid.in_bounds(start) || !grid.in_bounds(goal))
      reject(agent, "coordinate out of bounds");
    if (grid.blocked(start)) reject(agent, "start on a blocked cell");
    if (grid.blocked(goal)) reject(agent, "goal on a blocked cell");
    if (scen.map_name.empty()) scen.map_name = name;
    scen.agents.push_back({start, goal});
    ++agent;
  }
  if (n != kAllAgents && agent < n)
    throw ParseError("insufficient agents: file has " + std::to_string(agent) +
                     ", requested " + std::to_string(n));
  if (scen.agents.empty()) throw ParseError("scenario file has no agents");

  const int count = scen.agent_count();
  for (int i = 0; i < count; ++i) {
    for (int j = 0; j < i; ++j) {
      if (scen.agents[i].start == scen.agents[j].start)
        reject(i, "duplicate start with agent " + std::to_string(j));
      if (scen.agents[i].goal == scen.agents[j].goal)
        reject(i, "duplicate goal with agent " + std::to_string(j));
    }
  }
  for (int i = 0; i < count; ++i) {
    DistanceField df = bfs_distance(grid, scen.agents[i].start);
    if (df.at(grid, scen.agents[i].goal) == kUnreachable)
      reject(i, "goal unreachable from start");
  }
  return scen;
}

Scenario parse_scenario_file(const std::string& path, const Grid& grid, int n) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open scenario file: " + path);
  return parse_scenario(in, grid, n);
}

DistanceField bfs_distance(const Grid& grid, Cell source) {
  if (!grid.passable(source))
    throw std::invalid_argument("bfs_distance: source cell is blocked");
  DistanceField df;
  df.source = source;
  df.dist.assign(grid.size(), kUnreachable);
  std::deque<Cell> queue;
  df.dist[grid.index(source)] = 0;
  queue.push_back(source);
  while (!queue.empty()) {
    Cell c = queue.front();
    queue.pop_front();
    int d = df.dist[grid.index(c)];
    grid.for_neighbors(c, [&](Cell n) {
      if (df.dist[grid.index(n)] == kUnreachable) {
        df.dist[grid.index(n)] = d + 1;
        queue.push_back(n);
      }
    });
  }
  return df;
}

}  // namespace mapfsel
