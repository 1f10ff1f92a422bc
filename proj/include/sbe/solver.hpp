// Crank-Nicolson finite-difference solver for the 1D stochastic Burgers'
// equation on a periodic domain:
//
//   u_t + (u^2/2)_x = nu u_xx + eps eta + f
//
// Diffusion and the flux-form convection term are averaged between the old
// and new time levels. Noise and forcing enter explicitly. The implicit
// nonlinear system is solved by Picard iteration: the new-level flux u^2/2 is
// linearized about the previous iterate and each iterate costs one cyclic
// tridiagonal solve.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "sbe/grid.hpp"
#include "sbe/random.hpp"

namespace sbe {

struct SbeConfig {
  double nu = 0.01;
  double epsilon = 0.01;
  double dt = 0.01;
  Grid grid{};
  double picard_tol = 1e-8;
  int picard_max_iters = 50;
  double u_min = -8.0;
  double u_max = 8.0;

  // Throws std::invalid_argument naming the first offending field.
  void validate() const;
};

struct SolverState {
  Field u;
  double t = 0.0;
  Rng rng;
};

// Thrown when the Picard iteration fails to reach picard_tol.
class PicardDivergence : public std::runtime_error {
 public:
  PicardDivergence(double residual, int iterations);
  double residual() const { return residual_; }
  int iterations() const { return iterations_; }

 private:
  double residual_;
  int iterations_;
};

struct StepInfo {
  int iterations = 0;
  // Max-norm change between successive Picard iterates.
  std::vector<double> residuals;
  bool clamped = false;
};

// i.i.d. N(0,1) * eps * sqrt(dt/dx) per node.
Field sample_noise(const SbeConfig& config, Rng& rng);

// Semi-discrete right-hand side without noise or forcing:
// nu * D2 u - (F_{i+1} - F_{i-1}) / (2 dx), F = u^2 / 2.
Field burgers_rhs(const Field& u, double nu);

// Advances state by one time step. Throws PicardDivergence or
// std::domain_error on non-finite values.
StepInfo step(SolverState& state, const Field& forcing, const SbeConfig& config);

// Same as step() with a caller-supplied noise increment (used for
// deterministic tests and common-random-number evaluation).
StepInfo step_with_noise(SolverState& state, const Field& forcing, const Field& noise,
                         const SbeConfig& config);

struct Snapshot {
  double t;
  Field u;
};

// Unforced evolution from u0 up to t_end (a multiple of dt). Returns the
// states at the requested times (each rounded to the nearest step); when
// `times` is empty every step is returned, including t = 0.
std::vector<Snapshot> run_free_evolution(const Field& u0, const SbeConfig& config, double t_end,
                                         std::uint64_t seed, const std::vector<double>& times = {});

// Number of whole steps of size dt in `duration`; throws if `duration` is
// not a multiple of dt to 1e-9 relative.
std::size_t step_count(double duration, double dt);

// Solves lower_i*x_{i-1} + diag_i*x_i + upper_i*x_{i+1} = rhs_i (indices
// modulo n) in place. Intended for diagonally dominant systems.
void solve_cyclic_tridiagonal(std::span<const double> lower, std::span<const double> diag,
                              std::span<const double> upper, std::span<double> rhs);

}  // namespace sbe
