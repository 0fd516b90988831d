#pragma once
// Line-oriented "key = value" config with [section] headers; the pipeline
// reads a flat key namespace (section headers are cosmetic).

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mapfsel {

class Config {
 public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text);

  std::optional<std::string> get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& dflt) const;
  double get_double(const std::string& key, double dflt) const;
  int get_int(const std::string& key, int dflt) const;
  bool get_bool(const std::string& key, bool dflt) const;
  void set(const std::string& key, const std::string& value);

 private:
  std::map<std::string, std::string> values_;
};

std::vector<std::string> split_list(const std::string& s, char sep = ',');

struct PipelineConfig {
  std::string maps_dir;
  std::string scens_dir;
  std::string output_dir = "out";
  std::vector<std::string> portfolio;  // solver id strings
  double time_limit = 120.0;
  int agent_start = 10;
  int agent_step = 10;
  std::vector<std::string> objectives;  // "score:<w>" / "bound:<b>"
  std::string rescale_spec = "ppprrrp";
  int target = 384;
  std::string loss = "ce";
  double split_train = 0.7, split_val = 0.1, split_test = 0.2;
  uint64_t split_seed = 1;
  double penalty_factor = 5.0;
  int workers = 1;
  bool expansion_budget_mode = false;
  long long expansion_budget = 2'000'000;
  uint64_t run_seed = 1;
  // training
  double learning_rate = 0.05;
  int epochs = 200;
  int batch_size = 64;
  uint64_t train_seed = 1;
  bool augment = false;
  std::string stats_split = "train";  // or "all"

  static PipelineConfig from(const Config& cfg);
  void validate() const;  // throws std::invalid_argument
};

}  // namespace mapfsel
