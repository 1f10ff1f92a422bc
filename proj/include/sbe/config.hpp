// Experiment configuration: a flat `key = value` text format with `#`
// comments. Defaults reproduce the reference training setup.
#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "sbe/ddpg.hpp"
#include "sbe/environment.hpp"

namespace sbe {

struct ExperimentConfig {
  std::uint64_t seed = 42;

  // Physics and discretization.
  int n_x = 151;  // stored nodes including the periodic endpoint
  double x_upper = 2.0 * std::numbers::pi;
  double u_min = -8.0;
  double u_max = 8.0;
  double f_min = -10.0;
  double f_max = 10.0;
  double t_start = 0.0;
  double t_end = 2.0;
  double nu = 0.01;
  double epsilon = 0.01;
  double lambda = 0.2;
  double dt = 0.01;
  double picard_tol = 1e-8;
  int picard_max_iters = 50;
  double u0_amplitude = 4.0;
  double u0_offset = 0.0;
  int u0_wavenumber = 1;
  double control_lo = 0.0;
  double control_hi = 2.0 * std::numbers::pi;

  // MDP and agent.
  int action_dim = 4;
  double gamma = 0.99;
  double actor_lr = 2.5e-5;
  double critic_lr = 2.5e-4;
  int layer1_size = 400;
  int layer2_size = 300;
  double tau = 0.1;
  int buffer_size = 1'000'000;
  int batch_size = 64;
  int warmup = 1000;
  double reward_scale = 0.01;
  double q_max = 0.0;  // cap on critic targets; rewards are never positive
  std::string exploration = "gaussian";  // gaussian | ou
  double noise_sigma = 1.0;
  double noise_decay = 0.999;
  double noise_floor = 0.05;
  double ou_theta = 0.15;

  // Experiment orchestration.
  int episodes = 500;
  int eval_episodes = 100;
  std::vector<double> snapshot_times{0.0, 0.5, 1.0, 2.0};
  std::vector<double> feedback_gains{0.1, 0.5, 1.0, 2.0, 5.0, 10.0};
  int tune_episodes = 5;
  std::vector<double> sweep_k{4.0, 7.0, 10.0};
  double profile_time = 0.8;
  int profile_runs = 20;
  int workers = 0;  // 0 = hardware concurrency
  bool svg = false;
  bool transition_log = false;  // per-step CSV of every compared episode

  Grid grid() const;
  SbeConfig sbe() const;
  EnvConfig env() const;
  ddpg::DdpgConfig agent() const;
};

class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const { return problems_; }

 private:
  std::vector<std::string> problems_;
};

// Keys in serialization order.
const std::vector<std::string>& config_keys();

// Throws ConfigError for unknown keys or unparsable values.
void set_config_value(ExperimentConfig& config, const std::string& key, const std::string& value);
std::string get_config_value(const ExperimentConfig& config, const std::string& key);

// Throws ConfigError listing every field that violates its bounds.
void validate(const ExperimentConfig& config);

ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
std::string serialize_config(const ExperimentConfig& config);

// Applies `<prefix><KEY>` variables (key upper-cased) from `environment`.
void apply_env_overrides(ExperimentConfig& config, const std::map<std::string, std::string>& environment,
                         const std::string& prefix = "SBE_");
std::map<std::string, std::string> process_environment();

// FNV-1a of the serialized configuration, 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

}  // namespace sbe
