#include "mapfsel/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace mapfsel {

double accuracy(const std::vector<int>& predictions,
                const std::vector<int>& labels) {
  if (predictions.size() != labels.size() || predictions.empty())
    throw std::invalid_argument("accuracy: length mismatch or empty input");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i)
    if (predictions[i] == labels[i]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

double gap(const std::vector<int>& predictions,
           const std::vector<LabeledInstance>& split, int sbs_gap_solver,
           bool* degenerate) {
  if (split.empty() || predictions.size() != split.size())
    throw std::invalid_argument("gap: empty split or length mismatch");
  double pred = 0.0, vbs = 0.0, sbs = 0.0;
  for (std::size_t i = 0; i < split.size(); ++i) {
    pred += split[i].score[predictions[i]];
    vbs += split[i].score[split[i].label];
    sbs += split[i].score[sbs_gap_solver];
  }
  const double numer = pred - vbs;
  const double denom = sbs - vbs;
  if (degenerate) *degenerate = false;
  if (denom == 0.0) {
    if (numer == 0.0) return 0.0;
    if (degenerate) *degenerate = true;
    return std::numeric_limits<double>::infinity();
  }
  return numer / denom;
}

GapReport evaluate(const std::vector<int>& predictions,
                   const std::vector<LabeledInstance>& split,
                   const SbsAssignment& sbs,
                   const std::vector<std::string>& solver_ids) {
  GapReport rep;
  rep.objective = split.front().objective;
  rep.split_size = split.size();
  std::vector<int> labels;
  labels.reserve(split.size());
  for (const auto& inst : split) labels.push_back(inst.label);
  rep.accuracy = accuracy(predictions, labels);
  rep.gap = gap(predictions, split, sbs.sbs_gap, &rep.degenerate);
  double pred = 0.0, vbs = 0.0, s = 0.0;
  for (std::size_t i = 0; i < split.size(); ++i) {
    pred += split[i].score[predictions[i]];
    vbs += split[i].score[split[i].label];
    s += split[i].score[sbs.sbs_gap];
  }
  rep.mean_predictor = pred / split.size();
  rep.mean_vbs = vbs / split.size();
  rep.mean_sbs = s / split.size();
  rep.sbs_acc_id = solver_ids[sbs.sbs_acc];
  rep.sbs_gap_id = solver_ids[sbs.sbs_gap];
  return rep;
}

FrequencyTable frequency_report(const std::vector<LabeledInstance>& dataset,
                                std::size_t num_solvers) {
  FrequencyTable table;
  for (const auto& inst : dataset) {
    auto& row = table[inst.map_name];
    if (row.empty()) row.assign(num_solvers, 0);
    ++row[inst.label];
  }
  return table;
}

void write_frequency_csv(const FrequencyTable& table,
                         const std::vector<std::string>& solver_ids,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "map";
  for (const auto& id : solver_ids) out << "," << id;
  out << "\n";
  for (const auto& [map_name, counts] : table) {
    out << map_name;
    for (int c : counts) out << "," << c;
    out << "\n";
  }
}

void write_frequency_svg(const FrequencyTable& table,
                         const std::vector<std::string>& solver_ids,
                         const std::string& path) {
  // minimal self-contained stacked bar chart; the CSV is the canonical artifact
  static const char* kPalette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                                   "#59a14f", "#edc948", "#b07aa1", "#9c755f"};
  const int bar_w = 48, gap_w = 24, chart_h = 240, margin = 40;
  int total_max = 1;
  for (const auto& [_, counts] : table) {
    int sum = 0;
    for (int c : counts) sum += c;
    total_max = std::max(total_max, sum);
  }
  const int width = margin * 2 + static_cast<int>(table.size()) * (bar_w + gap_w);
  const int height = chart_h + margin * 2 + 14 * static_cast<int>(solver_ids.size());

  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width
      << "\" height=\"" << height << "\">\n";
  int x = margin;
  for (const auto& [map_name, counts] : table) {
    double y = margin + chart_h;
    for (std::size_t a = 0; a < counts.size(); ++a) {
      double h = static_cast<double>(counts[a]) / total_max * chart_h;
      y -= h;
      out << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar_w
          << "\" height=\"" << h << "\" fill=\"" << kPalette[a % 8] << "\"/>\n";
    }
    out << "<text x=\"" << x << "\" y=\"" << margin + chart_h + 14
        << "\" font-size=\"10\">" << map_name << "</text>\n";
    x += bar_w + gap_w;
  }
  for (std::size_t a = 0; a < solver_ids.size(); ++a) {
    int ly = margin + chart_h + 30 + 14 * static_cast<int>(a);
    out << "<rect x=\"" << margin << "\" y=\"" << ly - 9
        << "\" width=\"10\" height=\"10\" fill=\"" << kPalette[a % 8]
        << "\"/>\n<text x=\"" << margin + 14 << "\" y=\"" << ly
        << "\" font-size=\"10\">" << solver_ids[a] << "</text>\n";
  }
  out << "</svg>\n";
}

std::vector<AblationRow> sort_ablation(std::vector<AblationRow> rows) {
  std::stable_sort(rows.begin(), rows.end(),
                   [](const AblationRow& a, const AblationRow& b) {
                     if (a.gap != b.gap) return a.gap < b.gap;
                     if (a.accuracy != b.accuracy) return a.accuracy > b.accuracy;
                     return a.rescale_spec < b.rescale_spec;
                   });
  return rows;
}

void write_ablation_csv(const std::vector<AblationRow>& rows,
                        const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "rescale_spec,gap,accuracy\n";
  for (const auto& r : rows)
    out << r.rescale_spec << "," << r.gap << "," << r.accuracy << "\n";
}

std::string format_ablation_table(const std::vector<AblationRow>& rows) {
  std::ostringstream out;
  out << std::left << std::setw(12) << "spec" << std::right << std::setw(10)
      << "gap" << std::setw(10) << "acc"
      << "\n";
  for (std::size_t i = 0; i < rows.size(); ++i) {
    out << std::left << std::setw(12) << rows[i].rescale_spec << std::right
        << std::setw(10) << std::fixed << std::setprecision(3) << rows[i].gap
        << std::setw(10) << rows[i].accuracy << (i == 0 ? "  <- best gap" : "")
        << "\n";
  }
  return out.str();
}

}  // namespace mapfsel
