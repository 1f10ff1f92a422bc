// Command-line front end: free, train, compare and sweep-k experiments.
//
// Configuration precedence (later wins): built-in defaults, --config file,
// SBE_<KEY> environment variables, --<key> flags.

#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "sbe/config.hpp"
#include "sbe/experiments.hpp"
#include "sbe/solver.hpp"

namespace {

struct Options {
  std::string config_path;
  std::string out_dir = "out";
  std::map<std::string, std::optional<std::string>> overrides;
  std::vector<std::string> policies;
  bool quiet = false;
};

sbe::ExperimentConfig resolve(const Options& opts) {
  sbe::ExperimentConfig cfg = opts.config_path.empty() ? sbe::ExperimentConfig{} : sbe::load_config(opts.config_path);
  sbe::apply_env_overrides(cfg, sbe::process_environment());
  for (const auto& [key, value] : opts.overrides)
    if (value) sbe::set_config_value(cfg, key, *value);
  sbe::validate(cfg);
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Stochastic Burgers' shock damping: simulation, DDPG training and baseline comparison"};
  app.require_subcommand(1);
  Options opts;
  app.add_option("-c,--config", opts.config_path, "key = value configuration file")->check(CLI::ExistingFile);
  app.add_option("-o,--out", opts.out_dir, "output directory")->capture_default_str();
  app.add_flag("-q,--quiet", opts.quiet, "suppress progress output");
  const sbe::ExperimentConfig defaults;
  for (const auto& key : sbe::config_keys()) {
    auto& slot = opts.overrides[key];
    app.add_option_function<std::string>("--" + key, [&slot](const std::string& v) { slot = v; },
                                         "default: " + sbe::get_config_value(defaults, key))
        ->group("Experiment configuration");
  }

  auto* free = app.add_subcommand("free", "unforced shock evolution snapshots and energy trace");
  auto* train = app.add_subcommand("train", "train a DDPG agent and evaluate its greedy policy");
  auto* compare = app.add_subcommand("compare", "compare policies on common noise realizations");
  compare
      ->add_option("-p,--policy", opts.policies,
                   "uncontrolled | feedback | feedback:<gain> | agent:<checkpoint> (repeatable)")
      ->required();
  auto* sweep = app.add_subcommand("sweep-k", "train and evaluate one agent per action dimension in sweep_k");
  for (auto* sub : {free, train, compare, sweep}) sub->fallthrough();

  CLI11_PARSE(app, argc, argv);

  try {
    const sbe::ExperimentConfig cfg = resolve(opts);
    std::ostream* log = opts.quiet ? nullptr : &std::cout;
    if (free->parsed()) {
      const auto out = sbe::run_free(cfg, opts.out_dir);
      if (log) *log << "wrote " << out.snapshot_files.size() << " snapshots and " << out.energy_file.string() << '\n';
    } else if (train->parsed()) {
      const auto out = sbe::run_train(cfg, opts.out_dir, log);
      if (log) *log << "checkpoint: " << out.checkpoint.string() << '\n';
    } else if (compare->parsed()) {
      sbe::run_compare(cfg, opts.policies, opts.out_dir, log);
    } else if (sweep->parsed()) {
      sbe::run_sweep_k(cfg, opts.out_dir, log);
    }
  } catch (const sbe::ConfigError& e) {
    std::cerr << "configuration error:\n";
    for (const auto& p : e.problems()) std::cerr << "  " << p << '\n';
    return 2;
  } catch (const sbe::PicardDivergence& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
