#include "mapfsel/labeling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mapfsel {

ObjectiveSpec ObjectiveSpec::parse(const std::string& s) {
  ObjectiveSpec spec;
  std::string::size_type colon = s.find(':');
  if (colon == std::string::npos)
    throw std::invalid_argument("objective must be score:<w> or bound:<b>: " + s);
  std::string family = s.substr(0, colon);
  double v;
  try {
    v = std::stod(s.substr(colon + 1));
  } catch (const std::exception&) {
    throw std::invalid_argument("bad objective parameter: " + s);
  }
  if (family == "score") {
    if (v < 0) throw std::invalid_argument("score weight must be >= 0: " + s);
    spec.family = Family::SCORE;
  } else if (family == "bound") {
    if (v < 1) throw std::invalid_argument("bound must be >= 1: " + s);
    spec.family = Family::BOUND;
  } else {
    throw std::invalid_argument("objective must be score:<w> or bound:<b>: " + s);
  }
  spec.param = v;
  return spec;
}

namespace {
std::string trim_number(double v) {
  std::ostringstream ss;
  ss << v;  // shortest round-trip-ish formatting for config-scale values
  return ss.str();
}
}  // namespace

std::string ObjectiveSpec::str() const {
  return (family == Family::SCORE ? "score:" : "bound:") + trim_number(param);
}

std::string ObjectiveSpec::task_name(const std::string& loss) const {
  return (family == Family::SCORE ? "Score-" : "Bound-") + trim_number(param) +
         "-" + loss;
}

std::pair<double, double> normalize(const RunRecord& rec,
                                    const NormalizationContext& ctx) {
  if (ctx.cost_bound <= 0)
    throw std::invalid_argument("normalize: cost_bound must be positive");
  if (rec.success) {
    return {rec.time_s / ctx.time_limit,
            static_cast<double>(*rec.cost) / ctx.cost_bound};
  }
  if (!ctx.cost_min)
    throw std::invalid_argument("normalize: failure record needs cost_min");
  return {ctx.penalty_factor,
          ctx.penalty_factor * static_cast<double>(*ctx.cost_min) /
              ctx.cost_bound};
}

double score(double time_prime, double cost_prime, double w) {
  return time_prime + w * cost_prime;
}

namespace {

// Fills the normalized columns; returns false when the scenario is dropped.
bool prepare(const std::vector<RunRecord>& records, NormalizationContext ctx,
             LabeledInstance& inst, NormalizationContext& out_ctx) {
  if (records.empty()) return false;
  std::optional<long long> cost_min;
  for (const auto& r : records)
    if (r.success && r.cost)
      cost_min = cost_min ? std::min(*cost_min, *r.cost) : *r.cost;
  if (!cost_min) return false;           // every solver failed
  if (ctx.cost_bound <= 0) return false;  // all agents start at goal
  ctx.cost_min = cost_min;

  inst.map_name = records[0].map_name;
  inst.scenario_id = records[0].scenario_id;
  inst.agent_count = records[0].agent_count;
  for (const auto& r : records) {
    auto [tp, cp] = normalize(r, ctx);
    inst.time_prime.push_back(tp);
    inst.cost_prime.push_back(cp);
  }
  out_ctx = ctx;
  return true;
}

}  // namespace

std::optional<LabeledInstance> label_score(const std::vector<RunRecord>& records,
                                           const NormalizationContext& ctx,
                                           double w) {
  LabeledInstance inst;
  NormalizationContext full;
  if (!prepare(records, ctx, inst, full)) return std::nullopt;
  inst.objective = {ObjectiveSpec::Family::SCORE, w};
  for (std::size_t a = 0; a < records.size(); ++a)
    inst.score.push_back(score(inst.time_prime[a], inst.cost_prime[a], w));
  inst.label = static_cast<int>(
      std::min_element(inst.score.begin(), inst.score.end()) -
      inst.score.begin());
  return inst;
}

std::optional<LabeledInstance> label_bound(const std::vector<RunRecord>& records,
                                           const NormalizationContext& ctx,
                                           double bound) {
  LabeledInstance inst;
  NormalizationContext full;
  if (!prepare(records, ctx, inst, full)) return std::nullopt;
  inst.objective = {ObjectiveSpec::Family::BOUND, bound};
  // score column for BOUND objectives = penalized raw time (used by the gap)
  for (const auto& r : records)
    inst.score.push_back(r.success ? r.time_s
                                   : ctx.penalty_factor * ctx.time_limit);
  const double cost_cap = bound * static_cast<double>(*full.cost_min);
  int best = -1;
  for (std::size_t a = 0; a < records.size(); ++a) {
    const auto& r = records[a];
    if (!r.success || static_cast<double>(*r.cost) > cost_cap) continue;
    if (best < 0 || r.time_s < records[best].time_s) best = static_cast<int>(a);
  }
  inst.label = best;  // nonempty: the cost_min achiever is feasible
  return inst;
}

std::optional<LabeledInstance> label(const std::vector<RunRecord>& records,
                                     const NormalizationContext& ctx,
                                     const ObjectiveSpec& objective) {
  return objective.family == ObjectiveSpec::Family::SCORE
             ? label_score(records, ctx, objective.param)
             : label_bound(records, ctx, objective.param);
}

SbsAssignment compute_vbs_sbs(const std::vector<LabeledInstance>& split) {
  SbsAssignment out;
  if (split.empty()) return out;
  const std::size_t k = split[0].score.size();
  std::vector<int> freq(k, 0);
  out.mean_score.assign(k, 0.0);
  double vbs = 0.0;
  for (const auto& inst : split) {
    ++freq[inst.label];
    vbs += inst.score[inst.label];
    for (std::size_t a = 0; a < k; ++a) out.mean_score[a] += inst.score[a];
  }
  for (double& m : out.mean_score) m /= static_cast<double>(split.size());
  out.vbs_mean_score = vbs / static_cast<double>(split.size());
  out.sbs_acc = static_cast<int>(std::max_element(freq.begin(), freq.end()) -
                                 freq.begin());
  out.sbs_gap = static_cast<int>(
      std::min_element(out.mean_score.begin(), out.mean_score.end()) -
      out.mean_score.begin());
  return out;
}

}  // namespace mapfsel
