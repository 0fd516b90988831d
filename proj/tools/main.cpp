// mapfsel CLI: sweep | featurize | label | train | eval | report | ablate.
// Options layer over an optional key=value config file; flags win.

#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "mapfsel/config.hpp"
#include "mapfsel/pipeline.hpp"

namespace {

struct Cli {
  std::string config_path;
  bool force = false;
  mapfsel::PipelineConfig cfg;
  std::vector<std::string> specs;  // ablate only

  // raw comma-list option values; only applied when the user passed them
  std::string portfolio, objectives, loss;
};

void add_common(CLI::App* cmd, Cli& cli) {
  cmd->add_option("-c,--config", cli.config_path, "key=value config file");
  cmd->add_option("-o,--out", cli.cfg.output_dir, "output directory");
  cmd->add_flag("--force", cli.force, "rebuild artifacts that already exist");
  cmd->add_option("--maps", cli.cfg.maps_dir, "directory of .map files");
  cmd->add_option("--scens", cli.cfg.scens_dir, "directory of .scen files");
  cmd->add_option("--portfolio", cli.portfolio,
                  "comma list: cbs,pp,pibt,ecbs:<w>");
  cmd->add_option("--time-limit", cli.cfg.time_limit, "per-run limit, seconds");
  cmd->add_option("--agent-start", cli.cfg.agent_start, "first agent tier");
  cmd->add_option("--agent-step", cli.cfg.agent_step, "tier increment");
  cmd->add_option("--objectives", cli.objectives,
                  "comma list: score:<w>,bound:<b>");
  cmd->add_option("--workers", cli.cfg.workers, "sweep worker threads");
  cmd->add_option("--seed", cli.cfg.run_seed, "sweep seed");
  cmd->add_flag("--expansion-budget-mode", cli.cfg.expansion_budget_mode,
                "deterministic expansion budgets instead of wall clock");
  cmd->add_option("--expansion-budget", cli.cfg.expansion_budget,
                  "expansions per run in budget mode");
  cmd->add_option("--rescale", cli.cfg.rescale_spec,
                  "7-char per-channel spec, p=pad r=interpolate");
  cmd->add_option("--target", cli.cfg.target, "tensor side after rescale");
  cmd->add_option("--loss", cli.loss, "comma list: ce,bce,reg");
  cmd->add_option("--split-seed", cli.cfg.split_seed, "scenario split seed");
  cmd->add_option("--penalty", cli.cfg.penalty_factor, "failure penalty factor");
  cmd->add_option("--lr", cli.cfg.learning_rate, "learning rate");
  cmd->add_option("--epochs", cli.cfg.epochs, "training epochs");
  cmd->add_option("--batch", cli.cfg.batch_size, "minibatch size");
  cmd->add_option("--train-seed", cli.cfg.train_seed, "training RNG seed");
  cmd->add_flag("--augment", cli.cfg.augment, "train-time augmentation");
  cmd->add_option("--stats-split", cli.cfg.stats_split,
                  "normalization fit split: train|all");
}

// config file first, then every flag the user actually passed on top
mapfsel::PipelineConfig resolve(const CLI::App* cmd, const Cli& cli) {
  mapfsel::PipelineConfig cfg = mapfsel::PipelineConfig::from(
      cli.config_path.empty()
          ? mapfsel::Config{}
          : mapfsel::Config::parse_file(cli.config_path));

  auto passed = [&](const std::string& name) {
    return cmd->count(name) > 0;
  };
  if (passed("--out")) cfg.output_dir = cli.cfg.output_dir;
  if (passed("--maps")) cfg.maps_dir = cli.cfg.maps_dir;
  if (passed("--scens")) cfg.scens_dir = cli.cfg.scens_dir;
  if (passed("--portfolio")) cfg.portfolio = mapfsel::split_list(cli.portfolio);
  if (passed("--time-limit")) cfg.time_limit = cli.cfg.time_limit;
  if (passed("--agent-start")) cfg.agent_start = cli.cfg.agent_start;
  if (passed("--agent-step")) cfg.agent_step = cli.cfg.agent_step;
  if (passed("--objectives"))
    cfg.objectives = mapfsel::split_list(cli.objectives);
  if (passed("--workers")) cfg.workers = cli.cfg.workers;
  if (passed("--seed")) cfg.run_seed = cli.cfg.run_seed;
  if (passed("--expansion-budget-mode"))
    cfg.expansion_budget_mode = cli.cfg.expansion_budget_mode;
  if (passed("--expansion-budget"))
    cfg.expansion_budget = cli.cfg.expansion_budget;
  if (passed("--rescale")) cfg.rescale_spec = cli.cfg.rescale_spec;
  if (passed("--target")) cfg.target = cli.cfg.target;
  if (passed("--loss")) cfg.loss = cli.loss;
  if (passed("--split-seed")) cfg.split_seed = cli.cfg.split_seed;
  if (passed("--penalty")) cfg.penalty_factor = cli.cfg.penalty_factor;
  if (passed("--lr")) cfg.learning_rate = cli.cfg.learning_rate;
  if (passed("--epochs")) cfg.epochs = cli.cfg.epochs;
  if (passed("--batch")) cfg.batch_size = cli.cfg.batch_size;
  if (passed("--train-seed")) cfg.train_seed = cli.cfg.train_seed;
  if (passed("--augment")) cfg.augment = cli.cfg.augment;
  if (passed("--stats-split")) cfg.stats_split = cli.cfg.stats_split;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MAPF algorithm-selection pipeline"};
  app.require_subcommand(1);

  Cli cli;
  const char* names[] = {"sweep", "featurize", "label", "train",
                         "eval",  "report",    "ablate"};
  const char* descs[] = {
      "run the solver portfolio over agent-count sweeps",
      "export normalized 7-channel feature tensors",
      "derive objective labels from the record log",
      "fit the reference selector per (objective, loss)",
      "accuracy and VBS-SBS gap on the held-out split",
      "label-frequency tables and charts",
      "featurize/train/eval across rescale specs"};
  CLI::App* cmds[7];
  for (int i = 0; i < 7; ++i) {
    cmds[i] = app.add_subcommand(names[i], descs[i]);
    add_common(cmds[i], cli);
  }
  cmds[6]->add_option("specs", cli.specs,
                      "rescale specs to compare, or 'all' for the 16 grouped "
                      "combinations (default)");

  CLI11_PARSE(app, argc, argv);

  for (int i = 0; i < 7; ++i) {
    if (!cmds[i]->parsed()) continue;
    mapfsel::PipelineConfig cfg;
    try {
      cfg = resolve(cmds[i], cli);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << "\n";
      return 2;
    }
    switch (i) {
      case 0: return mapfsel::cmd_sweep(cfg, cli.force, std::cout, std::cerr);
      case 1: return mapfsel::cmd_featurize(cfg, cli.force, std::cout, std::cerr);
      case 2: return mapfsel::cmd_label(cfg, cli.force, std::cout, std::cerr);
      case 3: return mapfsel::cmd_train(cfg, cli.force, std::cout, std::cerr);
      case 4: return mapfsel::cmd_eval(cfg, cli.force, std::cout, std::cerr);
      case 5: return mapfsel::cmd_report(cfg, cli.force, std::cout, std::cerr);
      case 6:
        return mapfsel::cmd_ablate(cfg, cli.specs, cli.force, std::cout,
                                   std::cerr);
    }
  }
  return 2;
}
