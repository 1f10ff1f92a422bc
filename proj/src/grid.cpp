#include "sbe/grid.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "sbe/csv.hpp"

namespace sbe {

Grid::Grid(std::size_t n_points, double length)
    : n_points_(n_points), length_(length), dx_(length / static_cast<double>(n_points)) {
  if (n_points < 3) throw std::invalid_argument("Grid: n_points must be >= 3");
  if (!(length > 0.0) || !std::isfinite(length))
    throw std::invalid_argument("Grid: length must be positive and finite");
}

Field::Field(const Grid& grid, double value) : grid_(grid), values_(grid.n_points(), value) {}

Field::Field(const Grid& grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.n_points())
    throw std::invalid_argument("Field: value count does not match grid");
}

bool Field::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

namespace {

void require_same_grid(const Field& a, const Field& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("Field: grid mismatch");
}

void require_finite(const Field& f) {
  if (!f.all_finite()) throw std::domain_error("Field contains non-finite values");
}

}  // namespace

double exact_sum(std::span<const double> values) {
  // Shewchuk's non-overlapping partials, then a correctly rounded total.
  std::vector<double> partials;
  for (double x : values) {
    std::size_t i = 0;
    for (double y : partials) {
      if (std::abs(x) < std::abs(y)) std::swap(x, y);
      const double hi = x + y;
      const double lo = y - (hi - x);
      if (lo != 0.0) partials[i++] = lo;
      x = hi;
    }
    partials.resize(i);
    partials.push_back(x);
  }
  std::size_t n = partials.size();
  if (n == 0) return 0.0;
  double hi = partials[--n], lo = 0.0;
  while (n > 0) {
    const double x = hi, y = partials[--n];
    hi = x + y;
    lo = y - (hi - x);
    if (lo != 0.0) break;
  }
  if (n > 0 && ((lo < 0.0 && partials[n - 1] < 0.0) || (lo > 0.0 && partials[n - 1] > 0.0))) {
    const double y = lo * 2.0, x = hi + y;
    if (y == x - hi) hi = x;
  }
  return hi;
}

Field& Field::operator+=(const Field& rhs) {
  require_same_grid(*this, rhs);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += rhs.values_[i];
  return *this;
}

Field& Field::operator-=(const Field& rhs) {
  require_same_grid(*this, rhs);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= rhs.values_[i];
  return *this;
}

Field& Field::operator*=(double s) {
  for (double& v : values_) v *= s;
  return *this;
}

Field& Field::operator+=(double c) {
  for (double& v : values_) v += c;
  return *this;
}

Field operator+(Field lhs, const Field& rhs) { return lhs += rhs; }
Field operator-(Field lhs, const Field& rhs) { return lhs -= rhs; }
Field operator*(double s, Field f) { return f *= s; }

Field rotate(const Field& f, std::ptrdiff_t shift) {
  const auto n = static_cast<std::ptrdiff_t>(f.size());
  std::vector<double> out(f.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) out[i] = f[static_cast<std::size_t>(((i + shift) % n + n) % n)];
  return Field(f.grid(), std::move(out));
}

double integrate(const Field& field) {
  require_finite(field);
  return exact_sum(field.values()) * field.grid().dx();
}

double spatial_mean(const Field& field) { return integrate(field) / field.grid().length(); }

double l2_sq(const Field& field) {
  require_finite(field);
  std::vector<double> squares;
  squares.reserve(field.size());
  for (double v : field.values()) squares.push_back(v * v);
  return exact_sum(squares) * field.grid().dx();
}

double integrate(const Field& field, const Subdomain& omega) {
  require_finite(field);
  const Grid& g = field.grid();
  std::vector<double> selected;
  for (std::size_t i = 0; i < g.n_points(); ++i)
    if (omega.contains(g.x(i))) selected.push_back(field[i]);
  return exact_sum(selected) * g.dx();
}

double measure(const Grid& grid, const Subdomain& omega) {
  std::size_t count = 0;
  for (std::size_t i = 0; i < grid.n_points(); ++i)
    if (omega.contains(grid.x(i))) ++count;
  return static_cast<double>(count) * grid.dx();
}

std::size_t block_begin(std::size_t n, std::size_t k, std::size_t j) { return n * j / k; }

std::vector<double> block_means(const Field& field, std::size_t k) {
  const std::size_t n = field.size();
  if (k == 0 || k > n) throw std::invalid_argument("block_means: k must be in [1, n]");
  std::vector<double> means(k);
  for (std::size_t j = 0; j < k; ++j) {
    const std::size_t b = block_begin(n, k, j), e = block_begin(n, k, j + 1);
    double sum = 0.0;
    for (std::size_t i = b; i < e; ++i) sum += field[i];
    means[j] = sum / static_cast<double>(e - b);
  }
  return means;
}

void write_field_csv(std::ostream& out, const Field& field, const std::string& value_name) {
  out << "x," << value_name << '\n';
  for (std::size_t i = 0; i < field.size(); ++i)
    out << format_double(field.grid().x(i)) << ',' << format_double(field[i]) << '\n';
}

}  // namespace sbe
