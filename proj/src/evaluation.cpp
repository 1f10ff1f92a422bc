#include "sbe/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>
#include <numeric>
#include <thread>

namespace sbe {

EpisodeResult run_episode(Environment& env, const Policy& policy, std::uint64_t seed, const std::string& name,
                          const TransitionObserver& observer) {
  EpisodeResult result;
  result.seed = seed;
  result.policy = name;
  Field state = env.reset(seed);
  std::vector<double> rewards;
  rewards.reserve(env.config().steps_per_episode());
  while (!env.done()) {
    Transition tr = env.step(policy(state));
    rewards.push_back(tr.reward);
    result.state_cost += tr.terms.state_cost;
    result.action_cost += tr.terms.action_cost;
    if (observer) observer(tr, env.time());
    state = std::move(tr.next_state);
  }
  const EpisodeReturn ret = episode_return(rewards, env.config().gamma);
  result.undiscounted_return = ret.undiscounted;
  result.discounted_return = ret.discounted;
  result.steps = rewards.size();
  return result;
}

std::uint64_t evaluation_seed(std::uint64_t master, std::size_t index) {
  return derive_seed(master, stream::kEvalNoise, index);
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& fn) {
  if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
  workers = std::min(workers, count);
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::vector<EpisodeResult> evaluate_policy(const EnvConfig& config, const Policy& policy, std::size_t episodes,
                                           std::uint64_t master_seed, const std::string& name,
                                           std::size_t workers) {
  std::vector<EpisodeResult> results(episodes);
  parallel_for(episodes, workers, [&](std::size_t i) {
    Environment env(config);
    results[i] = run_episode(env, policy, evaluation_seed(master_seed, i), name);
  });
  return results;
}

ReturnSummary summarize(const std::vector<double>& values, double z) {
  ReturnSummary s;
  s.n = values.size();
  if (s.n == 0) return s;
  s.mean = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(s.n);
  if (s.n < 2) {
    s.degenerate = true;
    return s;
  }
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(ss / static_cast<double>(s.n - 1));
  s.ci_half = z * s.stddev / std::sqrt(static_cast<double>(s.n));
  return s;
}

ReturnSummary summarize_returns(const std::vector<EpisodeResult>& results) {
  std::vector<double> values;
  values.reserve(results.size());
  for (const auto& r : results) values.push_back(r.undiscounted_return);
  return summarize(values);
}

}  // namespace sbe
