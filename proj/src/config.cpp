#include "mapfsel/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mapfsel {
namespace {

std::string strip(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

Config Config::parse_string(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string l = strip(line);
    if (l.empty() || l[0] == '#' || l[0] == '[') continue;
    auto eq = l.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) +
                                  ": expected key = value");
    cfg.values_[strip(l.substr(0, eq))] = strip(l.substr(eq + 1));
  }
  return cfg;
}

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open config file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str());
}

std::optional<std::string> Config::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return std::nullopt;
  return it->second;
}

std::string Config::get_or(const std::string& key, const std::string& dflt) const {
  auto v = get(key);
  return v ? *v : dflt;
}

double Config::get_double(const std::string& key, double dflt) const {
  auto v = get(key);
  return v ? std::stod(*v) : dflt;
}

int Config::get_int(const std::string& key, int dflt) const {
  auto v = get(key);
  return v ? std::stoi(*v) : dflt;
}

bool Config::get_bool(const std::string& key, bool dflt) const {
  auto v = get(key);
  if (!v) return dflt;
  return *v == "1" || *v == "true" || *v == "yes" || *v == "on";
}

void Config::set(const std::string& key, const std::string& value) {
  values_[key] = value;
}

std::vector<std::string> split_list(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream ss(s);
  while (std::getline(ss, cur, sep)) {
    cur = strip(cur);
    if (!cur.empty()) out.push_back(cur);
  }
  return out;
}

PipelineConfig PipelineConfig::from(const Config& cfg) {
  PipelineConfig pc;
  pc.maps_dir = cfg.get_or("maps_dir", "");
  pc.scens_dir = cfg.get_or("scens_dir", "");
  pc.output_dir = cfg.get_or("output_dir", "out");
  pc.portfolio = split_list(cfg.get_or("portfolio", "cbs,pp,pibt,ecbs:1.1"));
  pc.time_limit = cfg.get_double("time_limit", 120.0);
  pc.agent_start = cfg.get_int("agent_start", 10);
  pc.agent_step = cfg.get_int("agent_step", 10);
  pc.objectives = split_list(cfg.get_or("objectives", "score:0.001"));
  pc.rescale_spec = cfg.get_or("rescale_spec", "ppprrrp");
  pc.target = cfg.get_int("target", 384);
  pc.loss = cfg.get_or("loss", "ce");
  auto split = split_list(cfg.get_or("split", "0.7,0.1,0.2"));
  if (split.size() != 3)
    throw std::invalid_argument("split must have three fractions");
  pc.split_train = std::stod(split[0]);
  pc.split_val = std::stod(split[1]);
  pc.split_test = std::stod(split[2]);
  pc.split_seed = static_cast<uint64_t>(cfg.get_int("split_seed", 1));
  pc.penalty_factor = cfg.get_double("penalty_factor", 5.0);
  pc.workers = cfg.get_int("workers", 1);
  pc.expansion_budget_mode = cfg.get_or("budget_mode", "wall") == "expansions";
  pc.expansion_budget =
      static_cast<long long>(cfg.get_double("expansion_budget", 2'000'000));
  pc.run_seed = static_cast<uint64_t>(cfg.get_int("run_seed", 1));
  pc.learning_rate = cfg.get_double("learning_rate", 0.05);
  pc.epochs = cfg.get_int("epochs", 200);
  pc.batch_size = cfg.get_int("batch_size", 64);
  pc.train_seed = static_cast<uint64_t>(cfg.get_int("train_seed", 1));
  pc.augment = cfg.get_bool("augment", false);
  pc.stats_split = cfg.get_or("stats_split", "train");
  return pc;
}

void PipelineConfig::validate() const {
  if (portfolio.empty()) throw std::invalid_argument("portfolio is empty");
  if (std::abs(split_train + split_val + split_test - 1.0) > 1e-9)
    throw std::invalid_argument("split fractions must sum to 1");
  if (time_limit <= 0) throw std::invalid_argument("time_limit must be > 0");
  if (agent_step < 1) throw std::invalid_argument("agent_step must be >= 1");
}

}  // namespace mapfsel
