#pragma once
// Accuracy and the VBS-SBS gap, plus frequency and ablation reports.

#include <map>
#include <string>
#include <vector>

#include "mapfsel/labeling.hpp"

namespace mapfsel {

struct GapReport {
  ObjectiveSpec objective;
  double accuracy = 0.0;
  double gap = 0.0;
  bool degenerate = false;  // SBS mean == VBS mean with nonzero numerator
  double mean_predictor = 0.0;
  double mean_vbs = 0.0;
  double mean_sbs = 0.0;
  std::string sbs_acc_id;
  std::string sbs_gap_id;
  std::size_t split_size = 0;
};

double accuracy(const std::vector<int>& predictions,
                const std::vector<int>& labels);

// (mean predicted score - mean VBS score) / (mean SBS score - mean VBS
// score). Zero numerator with zero denominator reports gap 0; nonzero
// numerator over zero denominator flags the split degenerate.
double gap(const std::vector<int>& predictions,
           const std::vector<LabeledInstance>& split, int sbs_gap_solver,
           bool* degenerate = nullptr);

GapReport evaluate(const std::vector<int>& predictions,
                   const std::vector<LabeledInstance>& split,
                   const SbsAssignment& sbs,
                   const std::vector<std::string>& solver_ids);

// map name -> per-solver label counts
using FrequencyTable = std::map<std::string, std::vector<int>>;
FrequencyTable frequency_report(const std::vector<LabeledInstance>& dataset,
                                std::size_t num_solvers);
void write_frequency_csv(const FrequencyTable& table,
                         const std::vector<std::string>& solver_ids,
                         const std::string& path);
void write_frequency_svg(const FrequencyTable& table,
                         const std::vector<std::string>& solver_ids,
                         const std::string& path);

struct AblationRow {
  std::string rescale_spec;
  double accuracy = 0.0;
  double gap = 0.0;
};

// Sorted by gap ascending (ties by accuracy descending, then spec); the
// best-gap row is flagged in the text rendering.
std::vector<AblationRow> sort_ablation(std::vector<AblationRow> rows);
void write_ablation_csv(const std::vector<AblationRow>& rows,
                        const std::string& path);
std::string format_ablation_table(const std::vector<AblationRow>& rows);

}  // namespace mapfsel
