// The controlled Burgers' system as a discounted MDP. State is the sampled
// velocity field, an action is k forcing coefficients applied on k
// near-equal sub-intervals, and the reward is
//
//   r = -[ 1/2 int_c (u - mean_c u)^2 dx + 1/2 lambda int_c f^2 dx ].
#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "sbe/grid.hpp"
#include "sbe/solver.hpp"

namespace sbe {

struct InitialCondition {
  // u0(x) = offset + amplitude * sin(wavenumber * x)
  double amplitude = 4.0;
  double offset = 0.0;
  int wavenumber = 1;

  Field sample(const Grid& grid) const;
};

struct EnvConfig {
  SbeConfig sbe{};
  double t_start = 0.0;
  double t_end = 2.0;
  std::size_t action_dim = 4;
  double f_min = -10.0;
  double f_max = 10.0;
  double lambda = 0.2;
  double gamma = 0.99;
  Subdomain control_domain{};
  InitialCondition u0{};

  void validate() const;
  std::size_t steps_per_episode() const;
};

struct RewardTerms {
  double state_cost = 0.0;   // 1/2 int_c (u - ubar)^2
  double action_cost = 0.0;  // 1/2 lambda int_c f^2
  double reward() const { return -(state_cost + action_cost); }
};

struct Transition {
  Field state;
  std::vector<double> action;
  double reward = 0.0;
  Field next_state;
  bool done = false;
  RewardTerms terms{};
};

// Piecewise-constant forcing; coefficients are clamped to [f_min, f_max].
Field expand_action(std::span<const double> coeffs, const Grid& grid, double f_min = -10.0,
                    double f_max = 10.0);

RewardTerms reward_terms(const Field& u, const Field& f, double lambda, const Subdomain& omega);
double reward(const Field& u, const Field& f, const EnvConfig& config);

struct EpisodeReturn {
  double undiscounted = 0.0;
  double discounted = 0.0;
};

EpisodeReturn episode_return(std::span<const double> rewards, double gamma);
EpisodeReturn episode_return(const std::vector<Transition>& transitions, double gamma);

class Environment {
 public:
  explicit Environment(EnvConfig config);

  // Starts a new episode; `seed` drives the solver noise stream.
  const Field& reset(std::uint64_t seed);

  // Throws std::logic_error before reset() or after the episode is done.
  Transition step(std::span<const double> action);

  const EnvConfig& config() const { return config_; }
  const Field& state() const { return state_.u; }
  double time() const { return state_.t; }
  std::size_t steps_taken() const { return steps_; }
  bool done() const { return started_ && steps_ >= config_.steps_per_episode(); }

 private:
  EnvConfig config_;
  SolverState state_;
  std::size_t steps_ = 0;
  bool started_ = false;
};

}  // namespace sbe
