#pragma once
// Normalized scores, objective labels (Score-w and Bound-b families) and
// VBS/SBS assignments over per-scenario run-record groups.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mapfsel/harness.hpp"

namespace mapfsel {

struct NormalizationContext {
  double time_limit = 0.0;
  long long cost_bound = 0;  // sum of per-agent BFS shortest-path costs
  std::optional<long long> cost_min;  // min cost among successful solvers
  double penalty_factor = 5.0;
};

struct ObjectiveSpec {
  enum class Family { SCORE, BOUND };
  Family family = Family::SCORE;
  double param = 0.0;  // w for SCORE, bound for BOUND

  // "score:<w>" / "bound:<b>", the CLI encoding.
  static ObjectiveSpec parse(const std::string& s);
  std::string str() const;
  // Task naming per objective+loss, e.g. "Score-0.001-CE".
  std::string task_name(const std::string& loss) const;
};

struct LabeledInstance {
  std::string map_name;
  std::string scenario_id;
  int agent_count = 0;
  std::vector<double> time_prime;   // per solver
  std::vector<double> cost_prime;   // per solver
  std::vector<double> score;        // per solver, objective-dependent
  int label = -1;                   // VBS choice, index into the portfolio
  ObjectiveSpec objective;
};

// Eqs. of the normalization: success -> (time/time_limit, cost/cost_bound);
// failure -> (penalty, penalty*cost_min/cost_bound).
std::pair<double, double> normalize(const RunRecord& rec,
                                    const NormalizationContext& ctx);

double score(double time_prime, double cost_prime, double w);

// records: one per portfolio solver, same scenario, portfolio order.
// Returns nullopt when the scenario must be dropped (no success, or
// cost_bound == 0).
std::optional<LabeledInstance> label_score(const std::vector<RunRecord>& records,
                                           const NormalizationContext& ctx,
                                           double w);
std::optional<LabeledInstance> label_bound(const std::vector<RunRecord>& records,
                                           const NormalizationContext& ctx,
                                           double bound);
std::optional<LabeledInstance> label(const std::vector<RunRecord>& records,
                                     const NormalizationContext& ctx,
                                     const ObjectiveSpec& objective);

struct SbsAssignment {
  int sbs_acc = -1;   // most frequent label on the split
  int sbs_gap = -1;   // solver minimizing the mean score on the split
  std::vector<double> mean_score;  // per solver
  double vbs_mean_score = 0.0;
};

SbsAssignment compute_vbs_sbs(const std::vector<LabeledInstance>& split);

}  // namespace mapfsel
