// Test-only reference solutions, written independently of the library.
#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

namespace oracle {

// Method-of-lines Burgers' right-hand side on a periodic grid of n points:
// nu * u_xx - (u^2/2)_x with second-order centred differences.
inline void burgers_mol(const std::vector<double>& u, double nu, double dx, std::vector<double>& out) {
  const std::size_t n = u.size();
  for (std::size_t i = 0; i < n; ++i) {
    const double up = u[(i + 1) % n], um = u[(i + n - 1) % n];
    out[i] = nu * (up - 2.0 * u[i] + um) / (dx * dx) - (up * up - um * um) / (4.0 * dx);
  }
}

// Classical RK4 from t = 0 to t_end with `steps` uniform steps.
inline std::vector<double> rk4_burgers(std::vector<double> u, double nu, double length, double t_end,
                                       std::size_t steps) {
  const std::size_t n = u.size();
  const double dx = length / static_cast<double>(n);
  const double h = t_end / static_cast<double>(steps);
  std::vector<double> k1(n), k2(n), k3(n), k4(n), tmp(n);
  for (std::size_t s = 0; s < steps; ++s) {
    burgers_mol(u, nu, dx, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * h * k1[i];
    burgers_mol(tmp, nu, dx, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + 0.5 * h * k2[i];
    burgers_mol(tmp, nu, dx, k3);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = u[i] + h * k3[i];
    burgers_mol(tmp, nu, dx, k4);
    for (std::size_t i = 0; i < n; ++i) u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
  }
  return u;
}

inline std::vector<double> sample(std::size_t n, double length, const std::function<double(double)>& fn) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = fn(static_cast<double>(i) * length / static_cast<double>(n));
  return v;
}

// Max-norm difference between a coarse solution and the fine one sampled at
// the coarse nodes (fine size must be a multiple of the coarse size).
inline double max_error_vs_fine(const std::vector<double>& coarse, const std::vector<double>& fine) {
  const std::size_t ratio = fine.size() / coarse.size();
  double e = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i) e = std::max(e, std::abs(coarse[i] - fine[i * ratio]));
  return e;
}

// Ordinary least squares y = a + b x; returns {a, b, R^2}.
struct LinearFit {
  double intercept, slope, r2;
};

inline LinearFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) sx += x[i], sy += y[i];
  const double mx = sx / n, my = sy / n;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  const double b = sxy / sxx;
  return {my - b * mx, b, sxy * sxy / (sxx * syy)};
}

}  // namespace oracle
