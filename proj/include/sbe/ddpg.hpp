// Deep deterministic policy gradient agent: a deterministic actor over the
// k forcing coefficients, a Q critic over (state, action), uniform experience
// replay, and soft-updated target networks.
#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "sbe/environment.hpp"
#include "sbe/nn.hpp"
#include "sbe/random.hpp"

namespace sbe::ddpg {

using nn::Matrix;
using nn::Vector;

enum class NoiseKind { kGaussian, kOrnsteinUhlenbeck };

struct ExplorationConfig {
  NoiseKind kind = NoiseKind::kGaussian;
  double sigma = 1.0;   // initial scale, in forcing units
  double decay = 0.999; // per-episode geometric decay
  double floor = 0.05;
  double ou_theta = 0.15;
};

struct DdpgConfig {
  std::size_t state_dim = 150;
  std::size_t action_dim = 4;
  std::size_t hidden1 = 400;
  std::size_t hidden2 = 300;
  double f_min = -10.0;
  double f_max = 10.0;
  double actor_lr = 2.5e-5;
  double critic_lr = 2.5e-4;
  double tau = 0.1;
  double gamma = 0.99;
  std::size_t buffer_capacity = 1'000'000;
  std::size_t batch_size = 64;
  std::size_t warmup = 1000;
  // Rewards are multiplied by this before entering the critic targets.
  double reward_scale = 1.0;
  // Critic targets are capped here. 0 is exact when no reward is positive.
  double q_max = std::numeric_limits<double>::infinity();
  ExplorationConfig exploration{};

  void validate() const;
};

// Per-dimension exploration process. The scale decays once per episode.
class ExplorationNoise {
 public:
  ExplorationNoise(std::size_t dim, ExplorationConfig config);

  std::vector<double> sample(Rng& rng);
  // Clears the OU state; the scale is kept.
  void reset();
  void end_episode();
  double scale() const { return scale_; }

 private:
  ExplorationConfig config_;
  double scale_;
  std::vector<double> ou_state_;
};

struct Batch {
  Matrix states;       // state_dim x B
  Matrix actions;      // action_dim x B
  Vector rewards;      // B
  Matrix next_states;  // state_dim x B
  Vector done;         // B, 1.0 for terminal
};

// Fixed-capacity ring; storage grows on demand up to capacity.
class ReplayBuffer {
 public:
  ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_dim);

  void add(std::span<const double> state, std::span<const double> action, double reward,
           std::span<const double> next_state, bool done);
  void add(const Transition& tr);

  std::size_t size() const { return size_; }
  std::size_t capacity() const { return capacity_; }

  std::vector<std::size_t> sample_indices(std::size_t batch_size, Rng& rng) const;
  Batch gather(const std::vector<std::size_t>& slots) const;
  Batch sample(std::size_t batch_size, Rng& rng) const;

  double reward_at(std::size_t slot) const { return rewards_.at(slot); }

 private:
  std::size_t capacity_, state_dim_, action_dim_;
  std::size_t size_ = 0, next_ = 0;
  std::vector<double> states_, actions_, rewards_, next_states_, done_;
};

struct UpdateStats {
  double critic_loss = 0.0;
  double actor_objective = 0.0;  // mean Q(s, mu(s)) over the batch, before the actor step
};

class Agent {
 public:
  Agent(DdpgConfig config, std::uint64_t init_seed);

  // Greedy action for one state.
  std::vector<double> act(const Field& state) const;
  // Greedy action plus exploration noise, clamped to the forcing bounds.
  std::vector<double> act(const Field& state, ExplorationNoise& noise, Rng& rng) const;
  // Batched greedy policy: action_dim x B.
  Matrix policy(const Matrix& states) const;

  // y = scale*r + gamma * (1 - done) * Q'(s', mu'(s')), target networks only.
  Vector critic_target(const Batch& batch) const;

  UpdateStats update(const ReplayBuffer& buffer, Rng& rng);
  UpdateStats update_on(const Batch& batch);

  void soft_update_targets();

  // Gradient of -mean Q(s, mu(s)) with respect to the actor parameters,
  // without modifying any network parameters. Optionally reports the batch
  // mean of Q(s, mu(s)).
  nn::Gradients actor_gradient(const Matrix& states, double* mean_q = nullptr);

  const DdpgConfig& config() const { return config_; }
  nn::Mlp& actor() { return actor_; }
  nn::Mlp& critic() { return critic_; }
  nn::Mlp& target_actor() { return target_actor_; }
  nn::Mlp& target_critic() { return target_critic_; }
  const nn::Mlp& actor() const { return actor_; }
  const nn::Mlp& critic() const { return critic_; }
  const nn::Mlp& target_actor() const { return target_actor_; }
  const nn::Mlp& target_critic() const { return target_critic_; }

  // Actor, critic and both targets in nn checkpoint format.
  void save(const std::string& path) const;
  static Agent load(const std::string& path, DdpgConfig config);

 private:
  Matrix squash(const Matrix& z) const;
  Matrix critic_input(const Matrix& states, const Matrix& actions) const;

  DdpgConfig config_;
  nn::Mlp actor_, critic_, target_actor_, target_critic_;
  nn::AdamState actor_opt_, critic_opt_;
};

struct EpisodeStats {
  std::size_t episode = 0;
  double undiscounted_return = 0.0;
  double discounted_return = 0.0;
  double critic_loss = 0.0;      // mean over the episode's updates
  double actor_objective = 0.0;  // mean over the episode's updates
  double noise_scale = 0.0;
  std::size_t updates = 0;
};

using TrainingHistory = std::vector<EpisodeStats>;

// Reset, explore, store, one update per environment step once the buffer
// holds max(warmup, batch_size) transitions. Episode e uses solver-noise
// seed derive_seed(seed, "solver-noise", e).
TrainingHistory train(Agent& agent, Environment& env, std::size_t episodes, std::uint64_t seed,
                      const std::function<void(const EpisodeStats&)>& on_episode = {});

// Builds the agent configuration matching an environment.
DdpgConfig config_for(const EnvConfig& env, DdpgConfig base = {});

}  // namespace sbe::ddpg
