#include "mapfsel/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include "mapfsel/grid.hpp"
#include "mapfsel/harness.hpp"
#include "mapfsel/labeling.hpp"
#include "mapfsel/metrics.hpp"
#include "mapfsel/selector.hpp"
#include "mapfsel/solvers.hpp"
#include "mapfsel/tensor.hpp"

namespace fs = std::filesystem;

namespace mapfsel {
namespace {

// exit 2: bad invocation or config; exit 3: inputs violate the data contract
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    fn();
    return 0;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const DataError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
}

// One writer per output directory at a time.
class LockFile {
 public:
  explicit LockFile(const fs::path& dir) : path_(dir / ".lock") {
    fs::create_directories(dir);
    if (fs::exists(path_))
      throw UsageError("lock file " + path_.string() +
                       " exists; another command is writing to this output "
                       "directory (remove the file if that run crashed)");
    std::ofstream out(path_);
    out << "locked\n";
  }
  ~LockFile() {
    std::error_code ec;
    fs::remove(path_, ec);
  }
  LockFile(const LockFile&) = delete;
  LockFile& operator=(const LockFile&) = delete;

 private:
  fs::path path_;
};

struct Paths {
  fs::path out;
  fs::path records_log() const { return out / "records.log"; }
  fs::path records_csv() const { return out / "records.csv"; }
  fs::path dropped_log() const { return out / "labels_dropped.log"; }
  fs::path tensors_dir() const { return out / "tensors"; }
  fs::path manifest() const { return tensors_dir() / "manifest.txt"; }
  fs::path models_dir() const { return out / "models"; }

  fs::path labels_csv(const ObjectiveSpec& o) const {
    return out / ("labels_" + file_tag(o) + ".csv");
  }
  fs::path eval_csv(const ObjectiveSpec& o, const LossSpec& l) const {
    return out / ("eval_" + file_tag(o) + "_" + l.str() + ".csv");
  }
  fs::path frequency_csv(const ObjectiveSpec& o) const {
    return out / ("frequency_" + file_tag(o) + ".csv");
  }
  fs::path frequency_svg(const ObjectiveSpec& o) const {
    return out / ("frequency_" + file_tag(o) + ".svg");
  }
  fs::path model_file(const ObjectiveSpec& o, const LossSpec& l) const {
    return models_dir() / (o.task_name(l.str()) + ".model");
  }
  fs::path loss_csv(const ObjectiveSpec& o, const LossSpec& l) const {
    return models_dir() / (o.task_name(l.str()) + "_loss.csv");
  }

  static std::string file_tag(const ObjectiveSpec& o) {
    std::string s = o.str();
    std::replace(s.begin(), s.end(), ':', '-');
    return s;
  }
};

std::vector<SolverSpec> parse_portfolio(const PipelineConfig& cfg) {
  if (cfg.portfolio.empty()) throw UsageError("empty portfolio");
  std::vector<SolverSpec> specs;
  for (const std::string& s : cfg.portfolio) specs.push_back(SolverSpec::parse(s));
  return specs;
}

std::vector<std::string> portfolio_ids(const PipelineConfig& cfg) {
  std::vector<std::string> ids;
  for (const SolverSpec& s : parse_portfolio(cfg)) ids.push_back(s.id);
  return ids;
}

std::vector<ObjectiveSpec> parse_objectives(const PipelineConfig& cfg) {
  if (cfg.objectives.empty()) throw UsageError("no objectives configured");
  std::vector<ObjectiveSpec> out;
  for (const std::string& s : cfg.objectives) out.push_back(ObjectiveSpec::parse(s));
  return out;
}

std::vector<LossSpec> parse_losses(const PipelineConfig& cfg) {
  std::vector<LossSpec> out;
  for (const std::string& s : split_list(cfg.loss)) out.push_back(LossSpec::parse(s));
  if (out.empty()) throw UsageError("no losses configured");
  return out;
}

// maps_dir/*.map paired with every scens_dir/<stem>[-...].scen, sorted.
std::vector<SweepPlan::ScenarioRef> discover(const PipelineConfig& cfg) {
  if (cfg.maps_dir.empty() || cfg.scens_dir.empty())
    throw UsageError("maps_dir and scens_dir are required");
  if (!fs::is_directory(cfg.maps_dir))
    throw DataError("maps_dir not found: " + cfg.maps_dir);
  if (!fs::is_directory(cfg.scens_dir))
    throw DataError("scens_dir not found: " + cfg.scens_dir);

  std::vector<std::pair<std::string, std::string>> maps;  // (stem, path)
  for (const auto& e : fs::directory_iterator(cfg.maps_dir))
    if (e.is_regular_file() && e.path().extension() == ".map")
      maps.emplace_back(e.path().stem().string(), e.path().string());
  std::sort(maps.begin(), maps.end());
  if (maps.empty()) throw DataError("no .map files in " + cfg.maps_dir);

  std::vector<std::string> scens;
  for (const auto& e : fs::directory_iterator(cfg.scens_dir))
    if (e.is_regular_file() && e.path().extension() == ".scen")
      scens.push_back(e.path().string());
  std::sort(scens.begin(), scens.end());

  std::vector<SweepPlan::ScenarioRef> refs;
  for (const auto& [stem, map_path] : maps) {
    for (const std::string& sp : scens) {
      std::string s = fs::path(sp).stem().string();
      if (s == stem || (s.size() > stem.size() + 1 && s.rfind(stem + "-", 0) == 0))
        refs.push_back({stem, map_path, s, sp});
    }
  }
  if (refs.empty())
    throw DataError("no .scen files in " + cfg.scens_dir +
                    " match any map in " + cfg.maps_dir);
  return refs;
}

struct InstanceKey {
  std::string map_name;
  std::string scenario_id;
  int agents = 0;
  auto operator<=>(const InstanceKey&) const = default;

  std::string tensor_file() const {
    return scenario_id + "_" + std::to_string(agents) + ".bin";
  }
};

// record log -> (instance -> per-solver record in portfolio order)
std::map<InstanceKey, std::vector<std::optional<RunRecord>>> group_records(
    const std::vector<RunRecord>& records, const std::vector<std::string>& ids) {
  std::map<InstanceKey, std::vector<std::optional<RunRecord>>> groups;
  for (const RunRecord& r : records) {
    auto it = std::find(ids.begin(), ids.end(), r.solver_id);
    if (it == ids.end()) continue;  // record from a solver outside the portfolio
    InstanceKey key{r.map_name, r.scenario_id, r.agent_count};
    auto& slot = groups[key];
    slot.resize(ids.size());
    slot[it - ids.begin()] = r;
  }
  return groups;
}

std::vector<RunRecord> load_records(const Paths& paths) {
  if (!fs::exists(paths.records_log()))
    throw DataError("no record log at " + paths.records_log().string() +
                    "; run `sweep` first");
  return read_record_log(paths.records_log().string());
}

// Per-scenario shortest-path cost prefix sums: cost_bound(k agents) =
// sum of the first k agents' BFS start->goal distances.
class CostBoundCache {
 public:
  explicit CostBoundCache(const PipelineConfig& cfg) {
    for (const auto& ref : discover(cfg)) scen_path_[{ref.map_name, ref.scenario_id}] = {ref.map_path, ref.scen_path};
  }

  long long bound(const InstanceKey& key) {
    auto& prefix = prefix_[{key.map_name, key.scenario_id}];
    if (prefix.empty()) {
      auto it = scen_path_.find({key.map_name, key.scenario_id});
      if (it == scen_path_.end())
        throw DataError("scenario " + key.scenario_id +
                        " in the record log has no .scen file on disk");
      const Grid& g = grid(key.map_name, it->second.first);
      Scenario scn = parse_scenario_file(it->second.second, g, kAllAgents);
      prefix.push_back(0);
      for (const AgentTask& a : scn.agents) {
        DistanceField d = bfs_distance(g, a.goal);
        int dist = d.at(g, a.start);
        if (dist == kUnreachable)
          throw DataError("unreachable goal in scenario " + key.scenario_id);
        prefix.push_back(prefix.back() + dist);
      }
    }
    if (key.agents >= static_cast<int>(prefix.size()))
      throw DataError("scenario " + key.scenario_id + " has fewer than " +
                      std::to_string(key.agents) + " agents on disk");
    return prefix[key.agents];
  }

  const Grid& grid(const std::string& map_name, const std::string& path) {
    auto it = grids_.find(map_name);
    if (it == grids_.end())
      it = grids_.emplace(map_name, parse_map_file(path)).first;
    return it->second;
  }

  Scenario scenario(const InstanceKey& key) {
    auto it = scen_path_.find({key.map_name, key.scenario_id});
    if (it == scen_path_.end())
      throw DataError("scenario " + key.scenario_id + " not found on disk");
    const Grid& g = grid(key.map_name, it->second.first);
    return parse_scenario_file(it->second.second, g, key.agents);
  }

 private:
  std::map<std::pair<std::string, std::string>, std::pair<std::string, std::string>>
      scen_path_;  // (map, scenario) -> (map path, scen path)
  std::map<std::string, Grid> grids_;
  std::map<std::pair<std::string, std::string>, std::vector<long long>> prefix_;
};

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

void write_labels_csv(const fs::path& path,
                      const std::vector<LabeledInstance>& rows,
                      const std::vector<std::string>& ids) {
  std::ofstream out(path);
  out << "map,scenario,agents,objective,label";
  for (const std::string& id : ids) out << ",score_" << id;
  out << "\n";
  for (const LabeledInstance& li : rows) {
    out << li.map_name << "," << li.scenario_id << "," << li.agent_count << ","
        << li.objective.str() << "," << ids[li.label];
    for (double s : li.score) out << "," << fmt(s);
    out << "\n";
  }
  if (!out) throw DataError("cannot write " + path.string());
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

std::vector<LabeledInstance> read_labels_csv(const fs::path& path,
                                             const std::vector<std::string>& ids) {
  std::ifstream in(path);
  if (!in)
    throw DataError("no label file at " + path.string() + "; run `label` first");
  std::string line;
  std::getline(in, line);  // header
  std::vector<LabeledInstance> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<std::string> f = split_csv_line(line);
    if (f.size() != 5 + ids.size())
      throw DataError("malformed label row in " + path.string() + ": " + line);
    LabeledInstance li;
    li.map_name = f[0];
    li.scenario_id = f[1];
    li.agent_count = std::stoi(f[2]);
    li.objective = ObjectiveSpec::parse(f[3]);
    auto it = std::find(ids.begin(), ids.end(), f[4]);
    if (it == ids.end())
      throw DataError("label '" + f[4] + "' in " + path.string() +
                      " is not in the configured portfolio");
    li.label = static_cast<int>(it - ids.begin());
    for (std::size_t i = 0; i < ids.size(); ++i)
      li.score.push_back(std::stod(f[5 + i]));
    rows.push_back(std::move(li));
  }
  return rows;
}

Split assign(const PipelineConfig& cfg, const std::string& scenario_id) {
  return split_assign(scenario_id, cfg.split_seed, cfg.split_train,
                      cfg.split_val);
}

// Everything eval/train need about one labeled, featurized instance.
struct Dataset {
  std::vector<std::string> ids;
  std::vector<LabeledInstance> rows;
  std::map<InstanceKey, FeatureTensor> tensors;  // map: stable addresses
  std::vector<Split> split;  // parallel to rows

  std::vector<LabeledInstance> rows_of(Split s) const {
    std::vector<LabeledInstance> out;
    for (std::size_t i = 0; i < rows.size(); ++i)
      if (split[i] == s) out.push_back(rows[i]);
    return out;
  }
};

Dataset load_dataset(const PipelineConfig& cfg, const Paths& paths,
                     const ObjectiveSpec& objective) {
  Dataset d;
  d.ids = portfolio_ids(cfg);
  d.rows = read_labels_csv(paths.labels_csv(objective), d.ids);
  if (d.rows.empty())
    throw DataError("label file " +
                    paths.labels_csv(objective).string() + " is empty");
  for (const LabeledInstance& li : d.rows) {
    InstanceKey key{li.map_name, li.scenario_id, li.agent_count};
    if (d.tensors.count(key)) continue;
    fs::path p = paths.tensors_dir() / key.tensor_file();
    if (!fs::exists(p))
      throw DataError("missing tensor " + p.string() + "; run `featurize`");
    d.tensors.emplace(key, read_tensor_binary(p.string(), cfg.target));
  }
  for (const LabeledInstance& li : d.rows)
    d.split.push_back(assign(cfg, li.scenario_id));
  return d;
}

std::vector<TrainInstance> to_train_instances(const Dataset& d, Split s) {
  std::vector<TrainInstance> out;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    if (d.split[i] != s) continue;
    const LabeledInstance& li = d.rows[i];
    TrainInstance ti;
    ti.tensor = &d.tensors.at({li.map_name, li.scenario_id, li.agent_count});
    ti.agent_count = li.agent_count;
    ti.label = li.label;
    ti.scores = li.score;
    out.push_back(std::move(ti));
  }
  return out;
}

std::vector<int> predict_split(const SelectorModel& model, const Dataset& d,
                               Split s) {
  std::vector<int> preds;
  for (std::size_t i = 0; i < d.rows.size(); ++i) {
    if (d.split[i] != s) continue;
    const LabeledInstance& li = d.rows[i];
    preds.push_back(predict(
        model, d.tensors.at({li.map_name, li.scenario_id, li.agent_count}),
        li.agent_count));
  }
  return preds;
}

void check_losses(const std::vector<ObjectiveSpec>& objectives,
                  const std::vector<LossSpec>& losses) {
  for (const ObjectiveSpec& o : objectives)
    for (const LossSpec& l : losses)
      if (o.family == ObjectiveSpec::Family::BOUND && l.kind == LossSpec::Kind::REG)
        throw UsageError(
            "regression loss is undefined for bound objectives (their score "
            "column is raw penalized time, not a bounded score); drop 'reg' "
            "or the bound objective");
}

int run_featurize(const PipelineConfig& cfg, bool force, std::ostream& out) {
  Paths paths{cfg.output_dir};
  LockFile lock(paths.tensors_dir());
  if (fs::exists(paths.manifest()) && !force) {
    out << "featurize: " << paths.manifest().string()
        << " exists, skipping (use --force to rebuild)\n";
    return 0;
  }
  RescaleSpec spec = RescaleSpec::parse(cfg.rescale_spec, cfg.target);
  std::vector<std::string> ids = portfolio_ids(cfg);
  auto groups = group_records(load_records(paths), ids);
  if (groups.empty()) throw DataError("record log has no portfolio records");

  CostBoundCache cache(cfg);
  std::map<InstanceKey, FeatureTensor> raw;
  for (const auto& [key, slot] : groups) {
    (void)slot;
    raw.emplace(key, assemble(cache.scenario(key)));
  }

  bool train_only = cfg.stats_split == "train";
  std::vector<FeatureTensor> fit_on;
  for (const auto& [key, t] : raw)
    if (!train_only || assign(cfg, key.scenario_id) == Split::TRAIN)
      fit_on.push_back(t);
  if (fit_on.empty()) {
    out << "featurize: train split is empty, fitting stats on all instances\n";
    for (const auto& [key, t] : raw) fit_on.push_back(t);
  }
  NormalizationStats stats = fit_stats(fit_on);

  std::vector<std::string> files;
  for (auto& [key, t] : raw) {
    apply_stats(t, stats);
    FeatureTensor scaled;
    try {
      scaled = rescale(t, spec);
    } catch (const std::exception& e) {
      throw DataError("rescale failed for map " + key.map_name + ": " + e.what());
    }
    std::string file = key.tensor_file();
    write_tensor_binary(scaled, (paths.tensors_dir() / file).string());
    files.push_back(file);
  }

  std::vector<ObjectiveSpec> objectives = parse_objectives(cfg);
  TensorExport info;
  info.dataset_name = spec.str() + "-" + std::to_string(spec.target);
  info.spec = spec;
  info.stats = stats;
  info.label_file = "labels_" + Paths::file_tag(objectives.front()) + ".csv";
  write_manifest(info, spec.target, files, paths.manifest().string());
  out << "featurize: wrote " << files.size() << " tensors + manifest to "
      << paths.tensors_dir().string() << "\n";
  return 0;
}

int run_train(const PipelineConfig& cfg, bool force, std::ostream& out) {
  Paths paths{cfg.output_dir};
  LockFile lock(paths.models_dir());
  std::vector<ObjectiveSpec> objectives = parse_objectives(cfg);
  std::vector<LossSpec> losses = parse_losses(cfg);
  check_losses(objectives, losses);

  for (const ObjectiveSpec& o : objectives) {
    Dataset d = load_dataset(cfg, paths, o);
    std::vector<TrainInstance> tr = to_train_instances(d, Split::TRAIN);
    std::vector<TrainInstance> va = to_train_instances(d, Split::VAL);
    if (tr.empty())
      throw DataError("train split is empty for objective " + o.str() +
                      "; adjust split fractions or the split seed");
    for (const LossSpec& l : losses) {
      fs::path model_path = paths.model_file(o, l);
      if (fs::exists(model_path) && !force) {
        out << "train: " << model_path.string() << " exists, skipping\n";
        continue;
      }
      TrainConfig tc;
      tc.learning_rate = cfg.learning_rate;
      tc.epochs = cfg.epochs;
      tc.batch_size = cfg.batch_size;
      tc.seed = cfg.train_seed;
      tc.augment = cfg.augment;
      TrainResult res = train(tr, va, d.ids, l, tc);
      res.model.save(model_path.string());
      std::ofstream traj(paths.loss_csv(o, l));
      traj << "epoch,train_loss,val_loss\n";
      for (std::size_t e = 0; e < res.train_loss.size(); ++e)
        traj << e << "," << fmt(res.train_loss[e]) << ","
             << (e < res.val_loss.size() ? fmt(res.val_loss[e]) : "") << "\n";
      out << "train: " << o.task_name(l.str()) << " best epoch "
          << res.best_epoch << " train loss "
          << res.train_loss[res.best_epoch] << " -> " << model_path.string()
          << "\n";
    }
  }
  return 0;
}

int run_eval(const PipelineConfig& cfg, bool force, std::ostream& out) {
  Paths paths{cfg.output_dir};
  std::vector<ObjectiveSpec> objectives = parse_objectives(cfg);
  std::vector<LossSpec> losses = parse_losses(cfg);
  check_losses(objectives, losses);

  for (const ObjectiveSpec& o : objectives) {
    Dataset d = load_dataset(cfg, paths, o);
    std::vector<LabeledInstance> train_rows = d.rows_of(Split::TRAIN);
    std::vector<LabeledInstance> test_rows = d.rows_of(Split::TEST);
    // SBS baselines are fit on the training split only
    SbsAssignment sbs =
        compute_vbs_sbs(train_rows.empty() ? d.rows : train_rows);
    if (test_rows.empty())
      throw DataError("test split is empty for objective " + o.str());

    for (const LossSpec& l : losses) {
      fs::path csv = paths.eval_csv(o, l);
      if (fs::exists(csv) && !force) {
        out << "eval: " << csv.string() << " exists, skipping\n";
        continue;
      }
      fs::path model_path = paths.model_file(o, l);
      if (!fs::exists(model_path))
        throw UsageError("no trained model at " + model_path.string() +
                         "; run `train` for task " + o.task_name(l.str()));
      SelectorModel model = SelectorModel::load(model_path.string(), d.ids);
      GapReport test = evaluate(predict_split(model, d, Split::TEST), test_rows,
                                sbs, d.ids);
      std::ofstream f(csv);
      f << "metric,value\n";
      f << "task," << o.task_name(l.str()) << "\n";
      f << "n_train," << train_rows.size() << "\n";
      f << "n_val," << d.rows_of(Split::VAL).size() << "\n";
      f << "n_test," << test_rows.size() << "\n";
      if (!train_rows.empty()) {
        GapReport tr = evaluate(predict_split(model, d, Split::TRAIN),
                                train_rows, sbs, d.ids);
        f << "accuracy_train," << fmt(tr.accuracy) << "\n";
        f << "gap_train," << fmt(tr.gap) << "\n";
      }
      f << "accuracy_test," << fmt(test.accuracy) << "\n";
      f << "gap_test," << fmt(test.gap) << "\n";
      f << "degenerate_test," << (test.degenerate ? 1 : 0) << "\n";
      f << "mean_score_predictor_test," << fmt(test.mean_predictor) << "\n";
      f << "mean_score_vbs_test," << fmt(test.mean_vbs) << "\n";
      f << "mean_score_sbs_test," << fmt(test.mean_sbs) << "\n";
      f << "sbs_acc_id," << test.sbs_acc_id << "\n";
      f << "sbs_gap_id," << test.sbs_gap_id << "\n";
      // SBS_Acc baseline accuracy: how often the single most frequent
      // solver is the right pick on the test split
      int hits = 0;
      for (const LabeledInstance& li : test_rows)
        if (li.label == sbs.sbs_acc) ++hits;
      f << "sbs_accuracy_test,"
        << fmt(static_cast<double>(hits) / test_rows.size()) << "\n";
      if (!f) throw DataError("cannot write " + csv.string());
      out << "eval: " << o.task_name(l.str()) << " accuracy_test "
          << test.accuracy << " gap_test " << test.gap << " -> " << csv.string()
          << "\n";
    }
  }
  return 0;
}

double read_eval_metric(const fs::path& csv, const std::string& metric) {
  std::ifstream in(csv);
  if (!in) throw DataError("missing eval artifact " + csv.string());
  std::string line;
  while (std::getline(in, line)) {
    auto f = split_csv_line(line);
    if (f.size() == 2 && f[0] == metric) return std::stod(f[1]);
  }
  throw DataError("metric " + metric + " not found in " + csv.string());
}

}  // namespace

Split split_assign(const std::string& scenario_key, uint64_t seed,
                   double f_train, double f_val) {
  // FNV-1a over the key bytes then the seed bytes; machine-independent.
  uint64_t h = 1469598103934665603ULL;
  auto mix = [&h](const unsigned char* p, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) {
      h ^= p[i];
      h *= 1099511628211ULL;
    }
  };
  mix(reinterpret_cast<const unsigned char*>(scenario_key.data()),
      scenario_key.size());
  unsigned char sb[8];
  for (int i = 0; i < 8; ++i) sb[i] = static_cast<unsigned char>(seed >> (8 * i));
  mix(sb, 8);
  double u = static_cast<double>(h >> 11) * 0x1.0p-53;
  if (u < f_train) return Split::TRAIN;
  if (u < f_train + f_val) return Split::VAL;
  return Split::TEST;
}

std::vector<std::string> expand_ablation_groups() {
  // channels grouped (1,2,3) | 4 | (5,6) | 7, each pad or interpolate
  std::vector<std::string> specs;
  for (char a : {'p', 'r'})
    for (char b : {'p', 'r'})
      for (char c : {'p', 'r'})
        for (char d : {'p', 'r'})
          specs.push_back({a, a, a, b, c, c, d});
  return specs;
}

int cmd_sweep(const PipelineConfig& cfg, bool force, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    Paths paths{cfg.output_dir};
    LockFile lock(paths.out);
    if (force) {
      fs::remove(paths.records_log());
      fs::remove(paths.records_log().string() + ".checkpoint");
    }
    SweepPlan plan;
    plan.scenarios = discover(cfg);
    plan.agent_start = cfg.agent_start;
    plan.agent_step = cfg.agent_step;
    plan.time_limit = cfg.time_limit;
    plan.expansion_budget_mode = cfg.expansion_budget_mode;
    plan.expansion_budget = cfg.expansion_budget;
    plan.seed = cfg.run_seed;
    plan.workers = std::max(1, cfg.workers);

    std::size_t n = 0, alarms = 0;
    SweepCallbacks cb;
    cb.on_record = [&](const RunRecord&) { ++n; };
    cb.on_alarm = [&](const std::string& msg) {
      ++alarms;
      err << "alarm: " << msg << "\n";
    };
    run_sweep(plan, parse_portfolio(cfg), paths.records_log().string(), cb);

    std::vector<RunRecord> all = read_record_log(paths.records_log().string());
    write_records_csv(all, paths.records_csv().string());
    out << "sweep: " << n << " new records (" << all.size() << " total, "
        << alarms << " alarms) -> " << paths.records_log().string() << "\n";
  });
}

int cmd_label(const PipelineConfig& cfg, bool force, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    Paths paths{cfg.output_dir};
    LockFile lock(paths.out);
    std::vector<ObjectiveSpec> objectives = parse_objectives(cfg);
    bool all_exist = true;
    for (const ObjectiveSpec& o : objectives)
      all_exist = all_exist && fs::exists(paths.labels_csv(o));
    if (all_exist && !force) {
      out << "label: all label files exist, skipping (use --force)\n";
      return;
    }

    std::vector<std::string> ids = portfolio_ids(cfg);
    auto groups = group_records(load_records(paths), ids);
    CostBoundCache cache(cfg);
    std::ofstream dropped(paths.dropped_log());

    for (const ObjectiveSpec& o : objectives) {
      std::vector<LabeledInstance> rows;
      for (const auto& [key, slot] : groups) {
        std::vector<RunRecord> recs;
        bool complete = true;
        for (const auto& r : slot) {
          if (!r) {
            complete = false;
            break;
          }
          recs.push_back(*r);
        }
        if (!complete) {
          dropped << key.map_name << " " << key.scenario_id << " "
                  << key.agents << " " << o.str() << " incomplete-portfolio\n";
          continue;
        }
        NormalizationContext ctx;
        ctx.time_limit = cfg.time_limit;
        ctx.cost_bound = cache.bound(key);
        ctx.penalty_factor = cfg.penalty_factor;
        std::optional<LabeledInstance> li = label(recs, ctx, o);
        if (!li) {
          dropped << key.map_name << " " << key.scenario_id << " "
                  << key.agents << " " << o.str() << " dropped\n";
          continue;
        }
        rows.push_back(std::move(*li));
      }
      if (rows.empty())
        throw DataError("every instance was dropped for objective " + o.str());
      write_labels_csv(paths.labels_csv(o), rows, ids);
      out << "label: " << rows.size() << " instances -> "
          << paths.labels_csv(o).string() << "\n";
    }
  });
}

int cmd_featurize(const PipelineConfig& cfg, bool force, std::ostream& out,
                  std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    run_featurize(cfg, force, out);
  });
}

int cmd_train(const PipelineConfig& cfg, bool force, std::ostream& out,
              std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    run_train(cfg, force, out);
  });
}

int cmd_eval(const PipelineConfig& cfg, bool force, std::ostream& out,
             std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    run_eval(cfg, force, out);
  });
}

int cmd_report(const PipelineConfig& cfg, bool force, std::ostream& out,
               std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    Paths paths{cfg.output_dir};
    std::vector<std::string> ids = portfolio_ids(cfg);
    for (const ObjectiveSpec& o : parse_objectives(cfg)) {
      fs::path csv = paths.frequency_csv(o);
      if (fs::exists(csv) && !force) {
        out << "report: " << csv.string() << " exists, skipping\n";
        continue;
      }
      std::vector<LabeledInstance> rows =
          read_labels_csv(paths.labels_csv(o), ids);
      FrequencyTable table = frequency_report(rows, ids.size());
      write_frequency_csv(table, ids, csv.string());
      write_frequency_svg(table, ids, paths.frequency_svg(o).string());
      out << "report: " << o.str() << " label frequencies -> " << csv.string()
          << " (+svg)\n";
    }
  });
}

int cmd_ablate(const PipelineConfig& cfg, const std::vector<std::string>& specs,
               bool force, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    cfg.validate();
    Paths paths{cfg.output_dir};
    LockFile lock(paths.out / "ablate");
    std::vector<std::string> expanded = specs;
    if (expanded.empty() || (expanded.size() == 1 && expanded[0] == "all"))
      expanded = expand_ablation_groups();
    for (const std::string& s : expanded)
      (void)RescaleSpec::parse(s, cfg.target);  // reject bad specs up front
    // duplicates would race on one output directory; keep first occurrence
    std::vector<std::string> unique;
    for (const std::string& s : expanded)
      if (std::find(unique.begin(), unique.end(), s) == unique.end())
        unique.push_back(s);
    expanded = std::move(unique);

    ObjectiveSpec objective = parse_objectives(cfg).front();
    LossSpec loss_spec = parse_losses(cfg).front();
    check_losses({objective}, {loss_spec});
    if (!fs::exists(paths.labels_csv(objective)))
      throw DataError("ablation needs " + paths.labels_csv(objective).string() +
                      "; run `sweep` and `label` first");

    std::vector<AblationRow> rows;
    for (const std::string& s : expanded) {
      PipelineConfig sub = cfg;
      sub.output_dir = (paths.out / "ablate" / s).string();
      sub.rescale_spec = s;
      sub.objectives = {objective.str()};
      sub.loss = loss_spec.str();
      Paths sub_paths{sub.output_dir};
      fs::create_directories(sub_paths.out);
      fs::copy_file(paths.records_log(), sub_paths.records_log(),
                    fs::copy_options::overwrite_existing);
      fs::copy_file(paths.labels_csv(objective),
                    sub_paths.labels_csv(objective),
                    fs::copy_options::overwrite_existing);
      int rc = cmd_featurize(sub, force, out, err);
      if (rc == 0) rc = cmd_train(sub, force, out, err);
      if (rc == 0) rc = cmd_eval(sub, force, out, err);
      if (rc != 0) throw DataError("ablation leg " + s + " failed");
      AblationRow row;
      row.rescale_spec = s;
      row.accuracy =
          read_eval_metric(sub_paths.eval_csv(objective, loss_spec), "accuracy_test");
      row.gap =
          read_eval_metric(sub_paths.eval_csv(objective, loss_spec), "gap_test");
      rows.push_back(row);
    }
    rows = sort_ablation(std::move(rows));
    write_ablation_csv(rows, (paths.out / "ablation.csv").string());
    std::string table = format_ablation_table(rows);
    std::ofstream txt(paths.out / "ablation.txt");
    txt << table;
    out << table;
  });
}

}  // namespace mapfsel
