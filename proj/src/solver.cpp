#include "sbe/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace sbe {

void SbeConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("SbeConfig: " + what); };
  if (!(nu > 0.0) || !std::isfinite(nu)) fail("nu must be > 0");
  if (!(dt > 0.0) || !std::isfinite(dt)) fail("dt must be > 0");
  if (!(epsilon >= 0.0) || !std::isfinite(epsilon)) fail("epsilon must be >= 0");
  if (!(picard_tol > 0.0)) fail("picard_tol must be > 0");
  if (picard_max_iters < 1) fail("picard_max_iters must be >= 1");
  if (!(u_min < u_max)) fail("u_min must be < u_max");
}

PicardDivergence::PicardDivergence(double residual, int iterations)
    : std::runtime_error("Picard iteration did not converge after " + std::to_string(iterations) +
                         " iterations (residual " + std::to_string(residual) + ")"),
      residual_(residual),
      iterations_(iterations) {}

Field sample_noise(const SbeConfig& config, Rng& rng) {
  const Grid& g = config.grid;
  Field noise(g);
  if (config.epsilon == 0.0) return noise;
  const double scale = config.epsilon * std::sqrt(config.dt / g.dx());
  for (std::size_t i = 0; i < g.n_points(); ++i) noise[i] = scale * rng.normal();
  return noise;
}

namespace {

// (F_{i+1} - F_{i-1}) / (2 dx) with F = u^2 / 2.
void convection(const Field& u, std::vector<double>& out) {
  const Grid& g = u.grid();
  const double c = 1.0 / (4.0 * g.dx());
  for (std::size_t i = 0; i < g.n_points(); ++i) {
    const double up = u[g.next(i)], um = u[g.prev(i)];
    out[i] = c * (up * up - um * um);
  }
}

void laplacian(const Field& u, std::vector<double>& out) {
  const Grid& g = u.grid();
  const double c = 1.0 / (g.dx() * g.dx());
  for (std::size_t i = 0; i < g.n_points(); ++i)
    out[i] = c * (u[g.next(i)] - 2.0 * u[i] + u[g.prev(i)]);
}

}  // namespace

Field burgers_rhs(const Field& u, double nu) {
  const std::size_t n = u.size();
  std::vector<double> conv(n), lap(n);
  convection(u, conv);
  laplacian(u, lap);
  Field out(u.grid());
  for (std::size_t i = 0; i < n; ++i) out[i] = nu * lap[i] - conv[i];
  return out;
}

void solve_cyclic_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                               std::span<const double> upper, std::span<double> rhs) {
  const std::size_t n = rhs.size();
  if (lower.size() != n || diag.size() != n || upper.size() != n || n < 3)
    throw std::invalid_argument("solve_cyclic_tridiagonal: size mismatch");
  // Sherman-Morrison: remove the corner entries beta = A(0, n-1) and
  // alpha = A(n-1, 0), solve two open tridiagonal systems, recombine.
  const double beta = lower[0];
  const double alpha = upper[n - 1];
  const double gamma = -diag[0];
  std::vector<double> b(diag.begin(), diag.end());
  b[0] -= gamma;
  b[n - 1] -= alpha * beta / gamma;

  std::vector<double> cprime(n);
  auto thomas = [&](std::span<double> x) {
    cprime[0] = upper[0] / b[0];
    x[0] /= b[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double m = b[i] - lower[i] * cprime[i - 1];
      cprime[i] = upper[i] / m;
      x[i] = (x[i] - lower[i] * x[i - 1]) / m;
    }
    for (std::size_t i = n - 1; i-- > 0;) x[i] -= cprime[i] * x[i + 1];
  };

  std::vector<double> z(n, 0.0);
  z[0] = gamma;
  z[n - 1] = alpha;
  thomas(rhs);
  thomas(z);
  const double fact = (rhs[0] + beta * rhs[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
  for (std::size_t i = 0; i < n; ++i) rhs[i] -= fact * z[i];
}

StepInfo step(SolverState& state, const Field& forcing, const SbeConfig& config) {
  return step_with_noise(state, forcing, sample_noise(config, state.rng), config);
}

StepInfo step_with_noise(SolverState& state, const Field& forcing, const Field& noise,
                         const SbeConfig& config) {
  const Grid& g = config.grid;
  if (!(state.u.grid() == g) || !(forcing.grid() == g) || !(noise.grid() == g))
    throw std::invalid_argument("step: field grid does not match solver grid");
  const std::size_t n = g.n_points();
  const double dt = config.dt;
  const double r = config.nu * dt / (g.dx() * g.dx());
  const double k = 0.5 * dt / (4.0 * g.dx());

  std::vector<double> lap(n), conv_old(n);
  laplacian(state.u, lap);
  convection(state.u, conv_old);

  // Explicit part of the increment, fixed across iterations.
  std::vector<double> base(n);
  for (std::size_t i = 0; i < n; ++i)
    base[i] = dt * config.nu * lap[i] - 0.5 * dt * conv_old[i] + dt * forcing[i] + noise[i];

  // Each iteration solves for the increment d = v - u with the new-level
  // flux v^2/2 lagged as w*v/2, w the previous iterate:
  //   d - (r/2) D2 d + k (w_{i+1} v_{i+1} - w_{i-1} v_{i-1}) = base.
  std::vector<double> lower(n), diag(n, 1.0 + r), upper(n), delta(n);
  StepInfo info;
  Field iterate = state.u;
  bool converged = false;
  double residual = 0.0;
  for (int it = 1; it <= config.picard_max_iters; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t ip = g.next(i), im = g.prev(i);
      lower[i] = -0.5 * r - k * iterate[im];
      upper[i] = -0.5 * r + k * iterate[ip];
      delta[i] = base[i] - k * (iterate[ip] * state.u[ip] - iterate[im] * state.u[im]);
    }
    solve_cyclic_tridiagonal(lower, diag, upper, delta);

    residual = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double next = state.u[i] + delta[i];
      residual = std::max(residual, std::abs(next - iterate[i]));
      iterate[i] = next;
    }
    info.iterations = it;
    info.residuals.push_back(residual);
    if (!std::isfinite(residual)) break;
    if (residual < config.picard_tol) {
      converged = true;
      break;
    }
  }
  if (!iterate.all_finite()) throw std::domain_error("step: solution became non-finite");
  if (!converged) throw PicardDivergence(residual, info.iterations);

  for (std::size_t i = 0; i < n; ++i) {
    const double c = std::clamp(iterate[i], config.u_min, config.u_max);
    if (c != iterate[i]) info.clamped = true;
    iterate[i] = c;
  }
  state.u = std::move(iterate);
  state.t += dt;
  return info;
}

std::size_t step_count(double duration, double dt) {
  const double ratio = duration / dt;
  const double rounded = std::round(ratio);
  if (!(rounded >= 0.0) || std::abs(ratio - rounded) > 1e-9 * std::max(1.0, ratio))
    throw std::invalid_argument("duration is not a whole multiple of dt");
  return static_cast<std::size_t>(rounded);
}

std::vector<Snapshot> run_free_evolution(const Field& u0, const SbeConfig& config, double t_end,
                                         std::uint64_t seed, const std::vector<double>& times) {
  config.validate();
  if (!(t_end > 0.0)) throw std::invalid_argument("run_free_evolution: t_end must be > 0");
  const std::size_t n_steps = step_count(t_end, config.dt);

  std::vector<std::size_t> wanted;
  for (double t : times) {
    const double k = std::round(t / config.dt);
    if (k < 0.0 || k > static_cast<double>(n_steps))
      throw std::invalid_argument("run_free_evolution: snapshot time outside [0, t_end]");
    wanted.push_back(static_cast<std::size_t>(k));
  }

  SolverState state{u0, 0.0, Rng(seed)};
  const Field zero(config.grid);
  std::vector<Snapshot> out;
  auto record = [&](std::size_t k) {
    if (times.empty() || std::find(wanted.begin(), wanted.end(), k) != wanted.end())
      out.push_back({static_cast<double>(k) * config.dt, state.u});
  };
  record(0);
  for (std::size_t k = 1; k <= n_steps; ++k) {
    step(state, zero, config);
    record(k);
  }
  return out;
}

}  // namespace sbe
