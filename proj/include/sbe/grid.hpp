// Uniform periodic grid on [0, L) and fields sampled on it.
#pragma once

#include <cstddef>
#include <iosfwd>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace sbe {

// Nodes x_i = i * dx for i in [0, n_points). The node at x = L is the same
// point as x = 0 and is never stored.
class Grid {
 public:
  explicit Grid(std::size_t n_points = 150, double length = 2.0 * std::numbers::pi);

  std::size_t n_points() const { return n_points_; }
  double length() const { return length_; }
  double dx() const { return dx_; }
  double x(std::size_t i) const { return static_cast<double>(i) * dx_; }

  // Periodic neighbour indices.
  std::size_t next(std::size_t i) const { return i + 1 == n_points_ ? 0 : i + 1; }
  std::size_t prev(std::size_t i) const { return i == 0 ? n_points_ - 1 : i - 1; }

  bool operator==(const Grid& other) const = default;

 private:
  std::size_t n_points_;
  double length_;
  double dx_;
};

class Field {
 public:
  Field() = default;
  explicit Field(const Grid& grid, double value = 0.0);
  Field(const Grid& grid, std::vector<double> values);

  // Samples fn(x_i) at every node.
  template <class Fn>
  static Field sample(const Grid& grid, Fn&& fn) {
    std::vector<double> v(grid.n_points());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = fn(grid.x(i));
    return Field(grid, std::move(v));
  }

  const Grid& grid() const { return grid_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t i) const { return values_[i]; }
  double& operator[](std::size_t i) { return values_[i]; }
  std::span<const double> values() const { return values_; }
  std::span<double> values() { return values_; }

  bool all_finite() const;

  Field& operator+=(const Field& rhs);
  Field& operator-=(const Field& rhs);
  Field& operator*=(double s);
  Field& operator+=(double c);

  bool operator==(const Field& other) const = default;

 private:
  Grid grid_{};
  std::vector<double> values_;
};

Field operator+(Field lhs, const Field& rhs);
Field operator-(Field lhs, const Field& rhs);
Field operator*(double s, Field f);

// Cyclic rotation: result[i] = f[(i + shift) mod n].
Field rotate(const Field& f, std::ptrdiff_t shift);

// Correctly rounded sum of finite values; independent of ordering.
double exact_sum(std::span<const double> values);

// Rectangle rule on the periodic grid. Sums are correctly rounded, so the
// result is invariant under any permutation of the nodes. Throws
// std::domain_error on non-finite values.
double integrate(const Field& field);
double spatial_mean(const Field& field);
double l2_sq(const Field& field);

// Sub-interval [lo, hi) of the domain, selecting nodes with lo <= x_i < hi.
// Endpoints are compared with a 1e-12 slack so that a node meant to sit on
// hi (such as x = pi on a 150-point grid) is not pulled in by rounding.
struct Subdomain {
  double lo = 0.0;
  double hi = 2.0 * std::numbers::pi;

  bool contains(double x) const { return x >= lo - kSlack && x < hi - kSlack; }

  static constexpr double kSlack = 1e-12;
};

// Restricted variants. `measure` is count(selected nodes) * dx.
double integrate(const Field& field, const Subdomain& omega);
double measure(const Grid& grid, const Subdomain& omega);

// Mean of `field` over k near-equal consecutive cell blocks; block j covers
// cells floor(n*j/k) .. floor(n*(j+1)/k) - 1.
std::vector<double> block_means(const Field& field, std::size_t k);
std::size_t block_begin(std::size_t n, std::size_t k, std::size_t j);

// One row per node: "x,value" with 17 significant digits.
void write_field_csv(std::ostream& out, const Field& field,
                     const std::string& value_name = "value");

}  // namespace sbe
