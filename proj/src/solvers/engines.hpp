#pragma once
// Per-solver entry points behind solve(); see portfolio.cpp for dispatch.

#include "mapfsel/solvers.hpp"

namespace mapfsel::detail {

// w == 0 runs optimal CBS; w > 1 runs ECBS with that suboptimality factor.
SolveResult solve_cbs(const Scenario& scn, Budget& budget, double w);
SolveResult solve_pp(const Scenario& scn, Budget& budget);
SolveResult solve_pibt(const Scenario& scn, Budget& budget, uint64_t seed);

// Drops trailing goal-waits so each path ends at its arrival time, and
// recomputes the sum of costs.
void finalize_solution(Solution& sol);

}  // namespace mapfsel::detail
