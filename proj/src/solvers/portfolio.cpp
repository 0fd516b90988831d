#include <cstdio>
#include <sstream>
#include <stdexcept>

#include "engines.hpp"

namespace mapfsel {

SolverSpec SolverSpec::parse(const std::string& s) {
  SolverSpec spec;
  spec.id = s;
  if (s == "cbs") {
    spec.kind = SolverKind::CBS;
  } else if (s == "pp") {
    spec.kind = SolverKind::PP;
  } else if (s == "pibt") {
    spec.kind = SolverKind::PIBT;
  } else if (s.rfind("ecbs:", 0) == 0) {
    spec.kind = SolverKind::ECBS;
    try {
      spec.w = std::stod(s.substr(5));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad ECBS factor in solver id: " + s);
    }
    if (spec.w < 1.0)
      throw std::invalid_argument("ECBS factor must be >= 1: " + s);
  } else {
    throw std::invalid_argument(
        "unknown solver id '" + s + "' (expected cbs, pp, pibt, ecbs:<w>)");
  }
  return spec;
}

Budget Budget::wall_clock(double seconds) {
  Budget b;
  b.wall_mode_ = true;
  b.deadline_ = std::chrono::steady_clock::now() +
                std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                    std::chrono::duration<double>(seconds));
  return b;
}

Budget Budget::expansions(long long max_expansions) {
  Budget b;
  b.max_ = max_expansions;
  return b;
}

bool Budget::tick() {
  if (expired_) return false;
  ++used_;
  if (wall_mode_) {
    // clock poll every 64 ticks keeps the overhead off the inner loops
    if ((used_ & 63) == 0 && std::chrono::steady_clock::now() >= deadline_)
      expired_ = true;
  } else if (used_ > max_) {
    expired_ = true;
  }
  return !expired_;
}

SolveResult solve(const SolverSpec& spec, const Scenario& scn, Budget& budget,
                  uint64_t seed) {
  switch (spec.kind) {
    case SolverKind::CBS:
      return detail::solve_cbs(scn, budget, 0.0);
    case SolverKind::ECBS:
      return detail::solve_cbs(scn, budget, spec.w);
    case SolverKind::PP:
      return detail::solve_pp(scn, budget);
    case SolverKind::PIBT:
      return detail::solve_pibt(scn, budget, seed);
  }
  return {};
}

std::optional<ExternalSolverAdapter::Outcome> ExternalSolverAdapter::run(
    const std::string& scenario_path, int agents, double time_limit_s,
    uint64_t seed) const {
  std::ostringstream cmd;
  cmd << command << " " << scenario_path << " " << agents << " "
      << time_limit_s << " " << seed;
  FILE* pipe = popen(cmd.str().c_str(), "r");
  if (!pipe) return std::nullopt;
  char line[256] = {0};
  bool got = fgets(line, sizeof line, pipe) != nullptr;
  int rc = pclose(pipe);
  if (!got || rc != 0) return std::nullopt;
  Outcome out;
  int success = 0;
  if (std::sscanf(line, "%lf %lld %d", &out.time_ms, &out.cost, &success) != 3)
    return std::nullopt;
  out.success = success != 0;
  return out;
}

namespace detail {

void finalize_solution(Solution& sol) {
  sol.sum_of_costs = 0;
  for (auto& p : sol.paths) {
    while (p.size() >= 2 && p[p.size() - 2] == p.back()) p.pop_back();
    sol.sum_of_costs += static_cast<long long>(p.size()) - 1;
  }
}

}  // namespace detail
}  // namespace mapfsel
