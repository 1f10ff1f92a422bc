#include "sbe/ddpg.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace sbe::ddpg {

void DdpgConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("DdpgConfig: " + what); };
  if (state_dim == 0 || action_dim == 0) fail("state_dim and action_dim must be positive");
  if (hidden1 == 0 || hidden2 == 0) fail("hidden layer sizes must be positive");
  if (!(f_min < f_max)) fail("f_min must be < f_max");
  if (!(actor_lr > 0.0) || !(critic_lr > 0.0)) fail("learning rates must be > 0");
  if (!(tau >= 0.0 && tau <= 1.0)) fail("tau must be in [0, 1]");
  if (!(gamma >= 0.0 && gamma <= 1.0)) fail("gamma must be in [0, 1]");
  if (buffer_capacity == 0) fail("buffer_capacity must be positive");
  if (batch_size == 0 || batch_size > buffer_capacity) fail("batch_size must be in [1, buffer_capacity]");
  if (!(reward_scale > 0.0)) fail("reward_scale must be > 0");
  if (std::isnan(q_max)) fail("q_max must not be NaN");
  if (!(exploration.sigma >= 0.0) || !(exploration.floor >= 0.0)) fail("exploration scales must be >= 0");
  if (!(exploration.decay > 0.0 && exploration.decay <= 1.0)) fail("exploration decay must be in (0, 1]");
  if (!(exploration.ou_theta > 0.0 && exploration.ou_theta <= 1.0)) fail("ou_theta must be in (0, 1]");
}

ExplorationNoise::ExplorationNoise(std::size_t dim, ExplorationConfig config)
    : config_(config), scale_(std::max(config.sigma, config.floor)), ou_state_(dim, 0.0) {}

std::vector<double> ExplorationNoise::sample(Rng& rng) {
  std::vector<double> out(ou_state_.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (config_.kind == NoiseKind::kGaussian) {
      out[i] = scale_ * rng.normal();
    } else {
      // Unit stationary variance AR(1) discretization of an OU process.
      const double keep = 1.0 - config_.ou_theta;
      ou_state_[i] = keep * ou_state_[i] + std::sqrt(1.0 - keep * keep) * rng.normal();
      out[i] = scale_ * ou_state_[i];
    }
  }
  return out;
}

void ExplorationNoise::reset() { std::fill(ou_state_.begin(), ou_state_.end(), 0.0); }

void ExplorationNoise::end_episode() { scale_ = std::max(config_.floor, scale_ * config_.decay); }

ReplayBuffer::ReplayBuffer(std::size_t capacity, std::size_t state_dim, std::size_t action_dim)
    : capacity_(capacity), state_dim_(state_dim), action_dim_(action_dim) {
  if (capacity == 0) throw std::invalid_argument("ReplayBuffer: capacity must be positive");
}

void ReplayBuffer::add(std::span<const double> state, std::span<const double> action, double reward,
                       std::span<const double> next_state, bool done) {
  if (state.size() != state_dim_ || next_state.size() != state_dim_ || action.size() != action_dim_)
    throw std::invalid_argument("ReplayBuffer::add: dimension mismatch");
  const std::size_t slot = next_;
  if (size_ < capacity_ && slot == rewards_.size()) {
    states_.insert(states_.end(), state.begin(), state.end());
    actions_.insert(actions_.end(), action.begin(), action.end());
    next_states_.insert(next_states_.end(), next_state.begin(), next_state.end());
    rewards_.push_back(reward);
    done_.push_back(done ? 1.0 : 0.0);
  } else {
    std::copy(state.begin(), state.end(), states_.begin() + slot * state_dim_);
    std::copy(action.begin(), action.end(), actions_.begin() + slot * action_dim_);
    std::copy(next_state.begin(), next_state.end(), next_states_.begin() + slot * state_dim_);
    rewards_[slot] = reward;
    done_[slot] = done ? 1.0 : 0.0;
  }
  next_ = (next_ + 1) % capacity_;
  size_ = std::min(size_ + 1, capacity_);
}

void ReplayBuffer::add(const Transition& tr) {
  add(tr.state.values(), tr.action, tr.reward, tr.next_state.values(), tr.done);
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch_size, Rng& rng) const {
  if (size_ == 0) throw std::logic_error("ReplayBuffer: sampling from an empty buffer");
  std::vector<std::size_t> idx(batch_size);
  for (auto& i : idx) i = rng.index(size_);
  return idx;
}

Batch ReplayBuffer::gather(const std::vector<std::size_t>& slots) const {
  const auto b = static_cast<Eigen::Index>(slots.size());
  Batch batch{Matrix(state_dim_, b), Matrix(action_dim_, b), Vector(b), Matrix(state_dim_, b), Vector(b)};
  for (Eigen::Index c = 0; c < b; ++c) {
    const std::size_t s = slots[static_cast<std::size_t>(c)];
    if (s >= size_) throw std::out_of_range("ReplayBuffer::gather: slot out of range");
    std::copy_n(states_.begin() + s * state_dim_, state_dim_, batch.states.col(c).data());
    std::copy_n(actions_.begin() + s * action_dim_, action_dim_, batch.actions.col(c).data());
    std::copy_n(next_states_.begin() + s * state_dim_, state_dim_, batch.next_states.col(c).data());
    batch.rewards(c) = rewards_[s];
    batch.done(c) = done_[s];
  }
  return batch;
}

Batch ReplayBuffer::sample(std::size_t batch_size, Rng& rng) const {
  return gather(sample_indices(batch_size, rng));
}

Agent::Agent(DdpgConfig config, std::uint64_t init_seed) : config_(std::move(config)) {
  config_.validate();
  Rng rng(init_seed);
  actor_ = nn::Mlp({config_.state_dim, config_.hidden1, config_.hidden2, config_.action_dim}, rng);
  critic_ = nn::Mlp({config_.state_dim + config_.action_dim, config_.hidden1, config_.hidden2, 1}, rng);
  target_actor_ = actor_;
  target_critic_ = critic_;
  actor_opt_ = nn::AdamState(actor_, {config_.actor_lr});
  critic_opt_ = nn::AdamState(critic_, {config_.critic_lr});
}

Matrix Agent::squash(const Matrix& z) const {
  const double mid = 0.5 * (config_.f_max + config_.f_min);
  const double half = 0.5 * (config_.f_max - config_.f_min);
  return (mid + half * z.array().tanh()).matrix();
}

Matrix Agent::critic_input(const Matrix& states, const Matrix& actions) const {
  Matrix x(states.rows() + actions.rows(), states.cols());
  x.topRows(states.rows()) = states;
  x.bottomRows(actions.rows()) = actions;
  return x;
}

Matrix Agent::policy(const Matrix& states) const { return squash(actor_.predict(states)); }

std::vector<double> Agent::act(const Field& state) const {
  if (state.size() != config_.state_dim) throw std::invalid_argument("Agent::act: state dimension mismatch");
  const auto values = state.values();
  Matrix s = Eigen::Map<const Matrix>(values.data(), static_cast<Eigen::Index>(values.size()), 1);
  const Matrix a = policy(s);
  return std::vector<double>(a.data(), a.data() + a.size());
}

std::vector<double> Agent::act(const Field& state, ExplorationNoise& noise, Rng& rng) const {
  std::vector<double> a = act(state);
  const std::vector<double> eps = noise.sample(rng);
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::clamp(a[i] + eps[i], config_.f_min, config_.f_max);
  return a;
}

Vector Agent::critic_target(const Batch& batch) const {
  const Matrix next_actions = squash(target_actor_.predict(batch.next_states));
  const Matrix q_next = target_critic_.predict(critic_input(batch.next_states, next_actions));
  Vector y(batch.rewards.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double r = config_.reward_scale * batch.rewards(i);
    y(i) = std::min(batch.done(i) != 0.0 ? r : r + config_.gamma * q_next(0, i), config_.q_max);
  }
  return y;
}

nn::Gradients Agent::actor_gradient(const Matrix& states, double* mean_q) {
  const double half = 0.5 * (config_.f_max - config_.f_min);
  const auto b = static_cast<double>(states.cols());
  const Matrix z = actor_.forward(states);
  const Matrix t = z.array().tanh().matrix();
  const Matrix actions = squash(z);
  const Matrix q = critic_.forward(critic_input(states, actions));
  if (mean_q) *mean_q = q.mean();
  const Matrix upstream = Matrix::Constant(1, states.cols(), -1.0 / b);
  const nn::Gradients through_critic = critic_.backward(upstream, false);
  const auto k = static_cast<Eigen::Index>(config_.action_dim);
  const Matrix d_action = through_critic.input.bottomRows(k);
  const Matrix d_z = (d_action.array() * half * (1.0 - t.array().square())).matrix();
  return actor_.backward(d_z);
}

UpdateStats Agent::update(const ReplayBuffer& buffer, Rng& rng) {
  if (buffer.size() < config_.batch_size)
    throw std::logic_error("Agent::update: buffer holds " + std::to_string(buffer.size()) +
                           " transitions, need " + std::to_string(config_.batch_size));
  return update_on(buffer.sample(config_.batch_size, rng));
}

UpdateStats Agent::update_on(const Batch& batch) {
  UpdateStats stats;
  const auto b = static_cast<double>(batch.rewards.size());

  const Vector y = critic_target(batch);
  const Matrix q = critic_.forward(critic_input(batch.states, batch.actions));
  const Matrix diff = q - y.transpose();
  stats.critic_loss = diff.squaredNorm() / b;
  nn::adam_step(critic_, critic_.backward(2.0 / b * diff), critic_opt_);

  const nn::Gradients actor_grads = actor_gradient(batch.states, &stats.actor_objective);
  nn::adam_step(actor_, actor_grads, actor_opt_);

  soft_update_targets();
  return stats;
}

void Agent::soft_update_targets() {
  target_actor_.soft_update_from(actor_, config_.tau);
  target_critic_.soft_update_from(critic_, config_.tau);
}

void Agent::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  nn::save_mlp(out, actor_);
  nn::save_mlp(out, critic_);
  nn::save_mlp(out, target_actor_);
  nn::save_mlp(out, target_critic_);
}

Agent Agent::load(const std::string& path, DdpgConfig config) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  Agent agent(std::move(config), 0);
  nn::Mlp actor = nn::load_mlp(in);
  nn::Mlp critic = nn::load_mlp(in);
  nn::Mlp target_actor = nn::load_mlp(in);
  nn::Mlp target_critic = nn::load_mlp(in);
  if (actor.sizes() != agent.actor_.sizes() || critic.sizes() != agent.critic_.sizes())
    throw std::runtime_error("checkpoint " + path + " does not match the configured network shapes");
  agent.actor_ = std::move(actor);
  agent.critic_ = std::move(critic);
  agent.target_actor_ = std::move(target_actor);
  agent.target_critic_ = std::move(target_critic);
  return agent;
}

DdpgConfig config_for(const EnvConfig& env, DdpgConfig base) {
  base.state_dim = env.sbe.grid.n_points();
  base.action_dim = env.action_dim;
  base.f_min = env.f_min;
  base.f_max = env.f_max;
  base.gamma = env.gamma;
  return base;
}

TrainingHistory train(Agent& agent, Environment& env, std::size_t episodes, std::uint64_t seed,
                      const std::function<void(const EpisodeStats&)>& on_episode) {
  const DdpgConfig& cfg = agent.config();
  if (env.config().action_dim != cfg.action_dim || env.config().sbe.grid.n_points() != cfg.state_dim)
    throw std::invalid_argument("train: agent and environment dimensions differ");

  ReplayBuffer buffer(cfg.buffer_capacity, cfg.state_dim, cfg.action_dim);
  ExplorationNoise noise(cfg.action_dim, cfg.exploration);
  Rng explore_rng(derive_seed(seed, stream::kExploration));
  Rng replay_rng(derive_seed(seed, stream::kReplay));
  const std::size_t ready = std::max(cfg.warmup, cfg.batch_size);

  TrainingHistory history;
  history.reserve(episodes);
  for (std::size_t e = 0; e < episodes; ++e) {
    Field state = env.reset(derive_seed(seed, stream::kSolverNoise, e));
    noise.reset();
    EpisodeStats stats;
    stats.episode = e;
    stats.noise_scale = noise.scale();
    std::vector<double> rewards;
    while (!env.done()) {
      const std::vector<double> action = agent.act(state, noise, explore_rng);
      Transition tr = env.step(action);
      buffer.add(tr);
      rewards.push_back(tr.reward);
      if (buffer.size() >= ready) {
        const UpdateStats u = agent.update(buffer, replay_rng);
        stats.critic_loss += u.critic_loss;
        stats.actor_objective += u.actor_objective;
        ++stats.updates;
      }
      state = std::move(tr.next_state);
    }
    if (stats.updates > 0) {
      stats.critic_loss /= static_cast<double>(stats.updates);
      stats.actor_objective /= static_cast<double>(stats.updates);
    }
    const EpisodeReturn ret = episode_return(rewards, env.config().gamma);
    stats.undiscounted_return = ret.undiscounted;
    stats.discounted_return = ret.discounted;
    noise.end_episode();
    history.push_back(stats);
    if (on_episode) on_episode(stats);
  }
  return history;
}

}  // namespace sbe::ddpg
