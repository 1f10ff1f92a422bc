// Measurement routines shared by the unit tests and the acceptance binary.
// Each returns the measured quantity; callers apply the tolerances.
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numbers>
#include <vector>

#include "oracles.hpp"
#include "sbe/ddpg.hpp"
#include "sbe/nn.hpp"
#include "sbe/solver.hpp"

namespace checks {

using sbe::nn::Matrix;
using sbe::nn::Mlp;

inline constexpr double kPi = std::numbers::pi;

inline Matrix uniform(Eigen::Index r, Eigen::Index c, sbe::Rng& rng, double lo = -1.0, double hi = 1.0) {
  Matrix m(r, c);
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = rng.uniform(lo, hi);
  return m;
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max(1.0, std::max(std::abs(a), std::abs(b))); }

// Central difference of `loss` with respect to every entry of `param`.
inline double fd_compare(double* param, Eigen::Index count, const double* analytic, const std::function<double()>& loss,
                         double h = 1e-5) {
  double worst = 0.0;
  for (Eigen::Index i = 0; i < count; ++i) {
    const double keep = param[i];
    param[i] = keep + h;
    const double up = loss();
    param[i] = keep - h;
    const double down = loss();
    param[i] = keep;
    worst = std::max(worst, rel_err((up - down) / (2.0 * h), analytic[i]));
  }
  return worst;
}

// Backprop vs finite differences for loss = sum(w .* net(x)), over weights,
// biases and inputs.
inline double gradient_error(Mlp& net, const Matrix& x, const Matrix& w) {
  net.forward(x);
  const auto g = net.backward(w);
  Matrix xp = x;
  auto loss = [&] { return (net.predict(xp).array() * w.array()).sum(); };
  double worst = 0.0;
  for (std::size_t l = 0; l < net.layers().size(); ++l) {
    auto& layer = net.layers()[l];
    worst = std::max(worst, fd_compare(layer.weight.data(), layer.weight.size(), g.weight[l].data(), loss));
    worst = std::max(worst, fd_compare(layer.bias.data(), layer.bias.size(), g.bias[l].data(), loss));
  }
  return std::max(worst, fd_compare(xp.data(), xp.size(), g.input.data(), loss));
}

// Worst relative error over `count` random small nets (the first is 4-8-8-2).
inline double backprop_fd_error(int count, std::uint64_t seed) {
  sbe::Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < count; ++t) {
    std::vector<std::size_t> sizes{4, 8, 8, 2};
    if (t > 0) sizes = {1 + rng.index(5), 1 + rng.index(8), 1 + rng.index(8), 1 + rng.index(3)};
    Mlp net(sizes, rng);
    for (auto& l : net.layers()) l.bias = uniform(l.bias.size(), 1, rng, -0.1, 0.1);
    const auto batch = static_cast<Eigen::Index>(1 + rng.index(4));
    const Matrix x = uniform(static_cast<Eigen::Index>(sizes.front()), batch, rng);
    const Matrix w = uniform(static_cast<Eigen::Index>(sizes.back()), batch, rng);
    worst = std::max(worst, gradient_error(net, x, w));
  }
  return worst;
}

inline sbe::ddpg::DdpgConfig small_agent_config(std::size_t state_dim, std::size_t action_dim, std::size_t hidden) {
  sbe::ddpg::DdpgConfig c;
  c.state_dim = state_dim;
  c.action_dim = action_dim;
  c.hidden1 = hidden;
  c.hidden2 = hidden;
  c.batch_size = 8;
  c.warmup = 8;
  c.buffer_capacity = 1000;
  return c;
}

// mean Q(s, mu(s)) evaluated with the agent's online networks.
inline double mean_q(const sbe::ddpg::Agent& agent, const Matrix& states) {
  Matrix x(states.rows() + static_cast<Eigen::Index>(agent.config().action_dim), states.cols());
  x.topRows(states.rows()) = states;
  x.bottomRows(static_cast<Eigen::Index>(agent.config().action_dim)) = agent.policy(states);
  return agent.critic().predict(x).mean();
}

// Actor gradient (through tanh squashing and the critic's input gradient)
// against finite differences of -mean Q(s, mu(s)), over `count` random agents.
inline double actor_chain_fd_error(int count, std::uint64_t seed) {
  sbe::Rng rng(seed);
  double worst = 0.0;
  for (int t = 0; t < count; ++t) {
    auto cfg = small_agent_config(2 + rng.index(4), 1 + rng.index(3), 3 + rng.index(6));
    cfg.f_min = -2.0;
    cfg.f_max = 3.0;
    sbe::ddpg::Agent agent(cfg, rng.index(1u << 30));
    for (auto* net : {&agent.actor(), &agent.critic()})
      for (auto& l : net->layers()) l.bias = uniform(l.bias.size(), 1, rng, -0.1, 0.1);
    const Matrix s = uniform(static_cast<Eigen::Index>(cfg.state_dim), 1 + static_cast<Eigen::Index>(rng.index(5)), rng);
    const auto g = agent.actor_gradient(s);
    auto loss = [&] { return -mean_q(agent, s); };
    for (std::size_t l = 0; l < agent.actor().layers().size(); ++l) {
      auto& layer = agent.actor().layers()[l];
      worst = std::max(worst, fd_compare(layer.weight.data(), layer.weight.size(), g.weight[l].data(), loss));
      worst = std::max(worst, fd_compare(layer.bias.data(), layer.bias.size(), g.bias[l].data(), loss));
    }
  }
  return worst;
}

// Critic computing -sum_j p((a_j - target_j)) where p is the piecewise-linear
// interpolant of x^2 on knots spaced `h` apart over the action bounds. A ReLU
// network cannot express x^2 itself; the interpolant is concave with the same
// maximiser when the targets sit on knots.
inline void set_quadratic_critic(sbe::ddpg::Agent& agent, const std::vector<double>& target, double h = 0.25) {
  const auto& cfg = agent.config();
  const auto n = static_cast<Eigen::Index>(std::llround((cfg.f_max - cfg.f_min) / h));
  const auto k = static_cast<Eigen::Index>(cfg.action_dim);
  const auto sd = static_cast<Eigen::Index>(cfg.state_dim);
  const Eigen::Index hidden = k * n;
  if (static_cast<Eigen::Index>(cfg.hidden1) != hidden || static_cast<Eigen::Index>(cfg.hidden2) != hidden)
    throw std::invalid_argument("set_quadratic_critic: hidden sizes must equal action_dim * knots");
  auto& layers = agent.critic().layers();
  layers[0].weight.setZero();
  layers[0].bias.setZero();
  layers[1].weight.setIdentity();
  layers[1].bias.setZero();
  layers[2].weight.setZero();
  double constant = 0.0;
  for (Eigen::Index j = 0; j < k; ++j) {
    auto p = [&](double a) { return (a - target[static_cast<std::size_t>(j)]) * (a - target[static_cast<std::size_t>(j)]); };
    constant += p(cfg.f_min);
    double prev_slope = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double t0 = cfg.f_min + static_cast<double>(i) * h;
      const double slope = (p(t0 + h) - p(t0)) / h;
      const Eigen::Index unit = j * n + i;
      layers[0].weight(unit, sd + j) = 1.0;  // relu(a_j - t0)
      layers[0].bias(unit) = -t0;
      layers[2].weight(0, unit) = -(slope - prev_slope);
      prev_slope = slope;
    }
  }
  layers[2].bias(0) = -constant;
}

struct Ascent {
  double objective_before, objective_after;
  double distance_before, distance_after;  // max-norm |mu(s) - target| over probes
};

// Adam steps on the actor alone against the frozen quadratic critic.
inline Ascent actor_ascent(std::size_t steps, std::uint64_t seed) {
  const std::vector<double> target{2.0, -3.5, 0.5, 6.0};
  const double h = 0.25;
  const std::size_t hidden = 4 * 80;
  auto cfg = small_agent_config(3, 4, hidden);
  cfg.actor_lr = 1e-3;
  sbe::ddpg::Agent agent(cfg, seed);
  set_quadratic_critic(agent, target, h);
  sbe::Rng rng(seed + 1);
  const Matrix s = uniform(3, 16, rng);
  auto distance = [&] {
    const Matrix a = agent.policy(s);
    double d = 0.0;
    for (Eigen::Index c = 0; c < a.cols(); ++c)
      for (Eigen::Index j = 0; j < 4; ++j) d = std::max(d, std::abs(a(j, c) - target[static_cast<std::size_t>(j)]));
    return d;
  };
  sbe::nn::AdamState opt(agent.actor(), {cfg.actor_lr});
  Ascent out{mean_q(agent, s), 0.0, distance(), 0.0};
  for (std::size_t i = 0; i < steps; ++i) sbe::nn::adam_step(agent.actor(), agent.actor_gradient(s), opt);
  out.objective_after = mean_q(agent, s);
  out.distance_after = distance();
  return out;
}

// Max over parameters of |(theta'_new - theta) - (1 - tau)(theta'_old - theta)|.
inline double soft_update_residual(const Mlp& online, Mlp target, double tau) {
  const auto theta = online.flat_parameters();
  const auto before = target.flat_parameters();
  target.soft_update_from(online, tau);
  const auto after = target.flat_parameters();
  double worst = 0.0;
  for (std::size_t i = 0; i < theta.size(); ++i)
    worst = std::max(worst, std::abs((after[i] - theta[i]) - (1.0 - tau) * (before[i] - theta[i])));
  return worst;
}

// Parameters on a coarse dyadic lattice so that soft updates with tau = 2^-m
// are exact in binary floating point.
inline void dyadic_parameters(Mlp& net, sbe::Rng& rng) {
  auto flat = net.flat_parameters();
  for (auto& v : flat) v = static_cast<double>(static_cast<int>(rng.index(2049)) - 1024) / 1024.0;
  net.set_flat_parameters(flat);
}

// Largest |count - mean| / sd over the items of a `items`-slot buffer after
// `draws` uniform draws.
inline double replay_max_z(std::size_t items, std::size_t draws, std::uint64_t seed) {
  sbe::ddpg::ReplayBuffer buf(items, 1, 1);
  for (std::size_t i = 0; i < items; ++i) {
    const double v = static_cast<double>(i);
    buf.add(std::vector<double>{v}, std::vector<double>{0.0}, v, std::vector<double>{v}, false);
  }
  sbe::Rng rng(seed);
  std::vector<double> counts(items, 0.0);
  for (std::size_t done = 0; done < draws; done += 100)
    for (std::size_t slot : buf.sample_indices(std::min<std::size_t>(100, draws - done), rng))
      counts[static_cast<std::size_t>(buf.reward_at(slot))] += 1.0;
  const double p = 1.0 / static_cast<double>(items);
  const double mean = static_cast<double>(draws) * p;
  const double sd = std::sqrt(static_cast<double>(draws) * p * (1.0 - p));
  double worst = 0.0;
  for (double c : counts) worst = std::max(worst, std::abs(c - mean) / sd);
  return worst;
}

struct NoiseMoments {
  double variance;
  double expected;
  double standard_error;
};

// Sample variance of per-node noise increments from at least `samples` values.
inline NoiseMoments noise_moments(const sbe::SbeConfig& c, std::size_t samples, std::uint64_t seed) {
  sbe::Rng rng(seed);
  double sum = 0.0, sq = 0.0;
  std::size_t count = 0;
  while (count < samples) {
    const sbe::Field noise = sbe::sample_noise(c, rng);
    for (double v : noise.values()) {
      sum += v;
      sq += v * v;
      ++count;
    }
  }
  const double n = static_cast<double>(count);
  const double var = (sq - sum * sum / n) / (n - 1.0);
  const double expected = c.epsilon * c.epsilon * c.dt / c.grid.dx();
  return {var, expected, expected * std::sqrt(2.0 / (n - 1.0))};
}

// R^2 of empirical variance against dt.
inline oracle::LinearFit noise_dt_fit(std::size_t samples, std::uint64_t seed) {
  std::vector<double> dts{0.001, 0.002, 0.005, 0.01, 0.02, 0.05}, vars;
  sbe::SbeConfig c;
  for (double dt : dts) {
    c.dt = dt;
    vars.push_back(noise_moments(c, samples, seed).variance);
  }
  return oracle::fit_line(dts, vars);
}

inline sbe::SbeConfig deterministic(double nu, double dt, std::size_t n = 150) {
  sbe::SbeConfig c;
  c.nu = nu;
  c.epsilon = 0.0;
  c.dt = dt;
  c.grid = sbe::Grid(n);
  return c;
}

inline std::vector<double> solve_to(const sbe::SbeConfig& c, const std::function<double(double)>& u0, double t_end) {
  sbe::SolverState s{sbe::Field::sample(c.grid, u0), 0.0, sbe::Rng(1)};
  const sbe::Field zero(c.grid);
  for (std::size_t k = 0, n = sbe::step_count(t_end, c.dt); k < n; ++k) sbe::step(s, zero, c);
  return {s.u.values().begin(), s.u.values().end()};
}

struct Convergence {
  std::vector<double> errors;  // grids 75, 150, 300
  double order_coarse, order_fine;
};

// u0 = 0.5 + sin(x), nu = 0.05, dt = 1e-3 to t = 0.5 against RK4 on 2400 points.
inline Convergence convergence_study() {
  const double nu = 0.05, t_end = 0.5;
  auto u0 = [](double x) { return 0.5 + std::sin(x); };
  const auto fine = oracle::rk4_burgers(oracle::sample(2400, 2.0 * kPi, u0), nu, 2.0 * kPi, t_end, 20000);
  Convergence out;
  for (std::size_t n : {75u, 150u, 300u})
    out.errors.push_back(oracle::max_error_vs_fine(solve_to(deterministic(nu, 1e-3, n), u0, t_end), fine));
  out.order_coarse = std::log2(out.errors[0] / out.errors[1]);
  out.order_fine = std::log2(out.errors[1] / out.errors[2]);
  return out;
}

struct Conservation {
  double max_momentum_drift;  // per step
  double max_energy_increase; // per step, <= 0 when monotone
};

inline Conservation conservation_run(double amplitude, std::size_t steps) {
  const auto c = deterministic(0.01, 0.01);
  sbe::SolverState s{sbe::Field::sample(c.grid, [&](double x) { return amplitude * std::sin(x); }), 0.0, sbe::Rng(0)};
  double m = sbe::integrate(s.u), e = sbe::l2_sq(s.u);
  Conservation out{0.0, -INFINITY};
  for (std::size_t k = 0; k < steps; ++k) {
    sbe::step(s, sbe::Field(c.grid), c);
    const double m2 = sbe::integrate(s.u), e2 = sbe::l2_sq(s.u);
    out.max_momentum_drift = std::max(out.max_momentum_drift, std::abs(m2 - m));
    out.max_energy_increase = std::max(out.max_energy_increase, e2 - e);
    m = m2;
    e = e2;
  }
  return out;
}

}  // namespace checks
