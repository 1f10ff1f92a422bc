#include "sbe/environment.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace sbe {

Field InitialCondition::sample(const Grid& grid) const {
  return Field::sample(grid, [this](double x) { return offset + amplitude * std::sin(wavenumber * x); });
}

void EnvConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("EnvConfig: " + what); };
  sbe.validate();
  if (action_dim < 1) fail("action_dim must be >= 1");
  if (action_dim > sbe.grid.n_points()) fail("action_dim must not exceed the number of grid points");
  if (!(t_end > t_start)) fail("t_end must be > t_start");
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must be in [0, 1]");
  if (!(lambda >= 0.0)) fail("lambda must be >= 0");
  if (!(f_min <= f_max)) fail("f_min must be <= f_max");
  if (!(measure(sbe.grid, control_domain) > 0.0)) fail("control domain contains no grid nodes");
  step_count(t_end - t_start, sbe.dt);
}

std::size_t EnvConfig::steps_per_episode() const { return step_count(t_end - t_start, sbe.dt); }

Field expand_action(std::span<const double> coeffs, const Grid& grid, double f_min, double f_max) {
  const std::size_t k = coeffs.size();
  const std::size_t n = grid.n_points();
  if (k == 0) throw std::invalid_argument("expand_action: empty coefficient vector");
  if (k > n) throw std::invalid_argument("expand_action: more intervals than grid points");
  Field f(grid);
  for (std::size_t j = 0; j < k; ++j) {
    if (!std::isfinite(coeffs[j])) throw std::domain_error("expand_action: non-finite coefficient");
    const double c = std::clamp(coeffs[j], f_min, f_max);
    for (std::size_t i = block_begin(n, k, j); i < block_begin(n, k, j + 1); ++i) f[i] = c;
  }
  return f;
}

RewardTerms reward_terms(const Field& u, const Field& f, double lambda, const Subdomain& omega) {
  if (!(u.grid() == f.grid())) throw std::invalid_argument("reward: grid mismatch");
  const Grid& g = u.grid();
  if (!u.all_finite()) throw std::domain_error("reward: non-finite state");
  if (!f.all_finite()) throw std::domain_error("reward: non-finite forcing");
  std::vector<double> selected;
  for (std::size_t i = 0; i < g.n_points(); ++i)
    if (omega.contains(g.x(i))) selected.push_back(u[i]);
  // Node average rather than integral / measure: exact for constant fields.
  const double ubar = exact_sum(selected) / static_cast<double>(selected.size());
  std::vector<double> dev, force;
  for (std::size_t i = 0; i < g.n_points(); ++i) {
    if (!omega.contains(g.x(i))) continue;
    const double d = u[i] - ubar;
    dev.push_back(d * d);
    force.push_back(f[i] * f[i]);
  }
  return {0.5 * exact_sum(dev) * g.dx(), 0.5 * lambda * exact_sum(force) * g.dx()};
}

double reward(const Field& u, const Field& f, const EnvConfig& config) {
  return reward_terms(u, f, config.lambda, config.control_domain).reward();
}

EpisodeReturn episode_return(std::span<const double> rewards, double gamma) {
  EpisodeReturn out;
  double discount = 1.0;
  for (double r : rewards) {
    out.undiscounted += r;
    out.discounted += discount * r;
    discount *= gamma;
  }
  return out;
}

EpisodeReturn episode_return(const std::vector<Transition>& transitions, double gamma) {
  std::vector<double> rewards;
  rewards.reserve(transitions.size());
  for (const auto& tr : transitions) rewards.push_back(tr.reward);
  return episode_return(rewards, gamma);
}

Environment::Environment(EnvConfig config) : config_(std::move(config)) { config_.validate(); }

const Field& Environment::reset(std::uint64_t seed) {
  state_ = SolverState{config_.u0.sample(config_.sbe.grid), config_.t_start, Rng(seed)};
  steps_ = 0;
  started_ = true;
  return state_.u;
}

Transition Environment::step(std::span<const double> action) {
  if (!started_) throw std::logic_error("Environment::step called before reset");
  if (done()) throw std::logic_error("Environment::step called on a finished episode");
  if (action.size() != config_.action_dim)
    throw std::invalid_argument("Environment::step: action has " + std::to_string(action.size()) +
                                " components, expected " + std::to_string(config_.action_dim));

  Transition tr;
  tr.state = state_.u;
  const Field forcing = expand_action(action, config_.sbe.grid, config_.f_min, config_.f_max);
  tr.action.reserve(action.size());
  for (double a : action) tr.action.push_back(std::clamp(a, config_.f_min, config_.f_max));

  sbe::step(state_, forcing, config_.sbe);
  ++steps_;
  state_.t = config_.t_start + static_cast<double>(steps_) * config_.sbe.dt;

  tr.terms = reward_terms(state_.u, forcing, config_.lambda, config_.control_domain);
  tr.reward = tr.terms.reward();
  tr.next_state = state_.u;
  tr.done = done();
  return tr;
}

}  // namespace sbe
