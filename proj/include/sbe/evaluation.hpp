// Episode rollouts for arbitrary policies and return statistics.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sbe/environment.hpp"

namespace sbe {

using Policy = std::function<std::vector<double>(const Field&)>;

struct EpisodeResult {
  std::uint64_t seed = 0;
  std::string policy;
  double undiscounted_return = 0.0;
  double discounted_return = 0.0;
  double state_cost = 0.0;   // summed over steps
  double action_cost = 0.0;  // summed over steps
  std::size_t steps = 0;
};

// Called after every transition with the post-step time.
using TransitionObserver = std::function<void(const Transition&, double t)>;

EpisodeResult run_episode(Environment& env, const Policy& policy, std::uint64_t seed,
                          const std::string& name = {}, const TransitionObserver& observer = {});

// Solver-noise seed of evaluation episode `index`; identical for every
// policy evaluated under the same master seed.
std::uint64_t evaluation_seed(std::uint64_t master, std::size_t index);

// Greedy rollouts of `episodes` episodes spread over `workers` threads
// (0 = hardware concurrency). Results are ordered by episode index and do
// not depend on the worker count. `policy` must be safe to call concurrently.
std::vector<EpisodeResult> evaluate_policy(const EnvConfig& config, const Policy& policy,
                                           std::size_t episodes, std::uint64_t master_seed,
                                           const std::string& name = {}, std::size_t workers = 0);

struct ReturnSummary {
  std::size_t n = 0;
  double mean = 0.0;
  double stddev = 0.0;     // sample standard deviation, 0 when n < 2
  double ci_half = 0.0;    // 1.645 * stddev / sqrt(n)
  bool degenerate = false; // n < 2: interval collapsed to the mean
  double ci_low() const { return mean - ci_half; }
  double ci_high() const { return mean + ci_half; }
};

inline constexpr double kZ90 = 1.645;

ReturnSummary summarize(const std::vector<double>& values, double z = kZ90);
ReturnSummary summarize_returns(const std::vector<EpisodeResult>& results);

// Runs fn(i) for i in [0, count) on up to `workers` threads.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn);

}  // namespace sbe
