// Experiment drivers behind the CLI subcommands. Every driver writes its
// CSVs into `out_dir` and is deterministic for a fixed configuration.
#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "sbe/config.hpp"
#include "sbe/ddpg.hpp"
#include "sbe/evaluation.hpp"

namespace sbe {

// "config_hash=<hex> seed=<n>"
std::string provenance(const ExperimentConfig& config);

struct FreeRunOutput {
  std::vector<std::filesystem::path> snapshot_files;
  std::filesystem::path energy_file;
};

// Unforced evolution from u0: one (t, x, u) snapshot file per configured
// snapshot time plus a per-step energy/momentum/max-gradient trace.
FreeRunOutput run_free(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct TrainOutput {
  ddpg::TrainingHistory history;
  ReturnSummary evaluation;
  std::filesystem::path checkpoint;
};

// Trains an agent for `episodes`, then evaluates the greedy policy over
// `eval_episodes`. Writes agent.ckpt, train_history.csv, train_eval.csv.
TrainOutput run_train(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                      std::ostream* log = nullptr);

struct NamedPolicy {
  std::string name;
  Policy policy;
  std::shared_ptr<const ddpg::Agent> agent;  // keeps agent-backed policies alive
};

// Policy specs: "uncontrolled", "feedback" (gain tuned over
// feedback_gains), "feedback:<gain>", "agent:<checkpoint path>".
NamedPolicy make_policy(const std::string& spec, const ExperimentConfig& config);

struct ComparisonRow {
  std::string policy;
  ReturnSummary summary;
  // Mean over profile_runs of int (u - ubar)^2 dx at profile_time.
  double deviation_at_profile = 0.0;
};

// Evaluates every policy on identical noise realizations and writes
// compare.csv, eval_<i>_<policy>.csv and profiles.csv (mean u and f at
// profile_time with 90% intervals).
std::vector<ComparisonRow> run_compare(const ExperimentConfig& config, const std::vector<std::string>& policies,
                                       const std::filesystem::path& out_dir, std::ostream* log = nullptr);
std::vector<ComparisonRow> run_compare(const ExperimentConfig& config, const std::vector<NamedPolicy>& policies,
                                       const std::filesystem::path& out_dir, std::ostream* log = nullptr);

struct SweepRow {
  std::size_t action_dim;
  ReturnSummary summary;
  std::filesystem::path checkpoint;
};

// Trains and evaluates one agent per entry of sweep_k; writes sweep_k.csv.
std::vector<SweepRow> run_sweep_k(const ExperimentConfig& config, const std::filesystem::path& out_dir,
                                  std::ostream* log = nullptr);

// Per-episode evaluation CSV shared by agents and baselines.
void write_evaluation_csv(const std::filesystem::path& path, const std::string& provenance,
                          const std::vector<EpisodeResult>& results);

}  // namespace sbe
