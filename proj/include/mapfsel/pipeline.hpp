#pragma once
// Subcommand orchestration behind the CLI: sweep, featurize, label, train,
// eval, report, ablate. Exit codes: 0 success, 2 usage/config error,
// 3 data-contract error.

#include <iosfwd>
#include <string>
#include <vector>

#include "mapfsel/config.hpp"

namespace mapfsel {

enum class Split { TRAIN, VAL, TEST };

// Stable across machines: depends only on (scenario key, split seed).
Split split_assign(const std::string& scenario_key, uint64_t seed,
                   double f_train, double f_val);

int cmd_sweep(const PipelineConfig& cfg, bool force, std::ostream& out,
              std::ostream& err);
int cmd_featurize(const PipelineConfig& cfg, bool force, std::ostream& out,
                  std::ostream& err);
int cmd_label(const PipelineConfig& cfg, bool force, std::ostream& out,
              std::ostream& err);
int cmd_train(const PipelineConfig& cfg, bool force, std::ostream& out,
              std::ostream& err);
int cmd_eval(const PipelineConfig& cfg, bool force, std::ostream& out,
             std::ostream& err);
int cmd_report(const PipelineConfig& cfg, bool force, std::ostream& out,
               std::ostream& err);
int cmd_ablate(const PipelineConfig& cfg, const std::vector<std::string>& specs,
               bool force, std::ostream& out, std::ostream& err);

// The grouped rescale space {(1,2,3)} x {4} x {(5,6)} x {7}: 16 specs.
std::vector<std::string> expand_ablation_groups();

}  // namespace mapfsel
