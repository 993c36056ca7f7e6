#include "hjtorus/torus_grid.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

namespace hjt {

TorusGrid::TorusGrid(int dim, int nodes_per_axis) : dim_(dim), nodes_(nodes_per_axis) {
  if (dim < 1 || dim > kMaxDim) {
    throw ParameterError("grid dimension must lie in [1, " + std::to_string(kMaxDim) + "], got " +
                         std::to_string(dim));
  }
  if (nodes_per_axis < 2) {
    throw ParameterError("nodes_per_axis must be >= 2, got " + std::to_string(nodes_per_axis));
  }
  h_ = 1.0 / nodes_per_axis;
  size_ = 1;
  for (int a = dim - 1; a >= 0; --a) {
    strides_[a] = size_;
    if (size_ > (std::size_t{1} << 40) / static_cast<std::size_t>(nodes_per_axis)) {
      throw ParameterError("grid too large");
    }
    size_ *= static_cast<std::size_t>(nodes_per_axis);
  }
}

TorusGrid make_grid(int dim, int nodes_per_axis) { return TorusGrid(dim, nodes_per_axis); }

std::size_t TorusGrid::flat(const MultiIndex& m) const {
  std::size_t k = 0;
  for (int a = 0; a < dim_; ++a) k += static_cast<std::size_t>(m[a]) * strides_[a];
  return k;
}

MultiIndex TorusGrid::multi(std::size_t flat) const {
  MultiIndex m;
  m.dim = dim_;
  for (int a = 0; a < dim_; ++a) m[a] = component(flat, a);
  return m;
}

Point TorusGrid::node(std::size_t flat) const {
  Point x(dim_);
  for (int a = 0; a < dim_; ++a) x[a] = static_cast<double>(component(flat, a)) * h_;
  return x;
}

GridFunction::GridFunction(TorusGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.size()) {
    throw ParameterError("grid function has " + std::to_string(values_.size()) + " values, grid has " +
                         std::to_string(grid_.size()) + " nodes");
  }
  for (std::size_t k = 0; k < values_.size(); ++k) {
    if (!std::isfinite(values_[k])) {
      throw InvariantViolation("non-finite grid value at node " + std::to_string(k));
    }
  }
}

double GridFunction::sup_norm() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

double GridFunction::max() const { return *std::max_element(values_.begin(), values_.end()); }
double GridFunction::min() const { return *std::min_element(values_.begin(), values_.end()); }

GridFunction blend(const GridFunction& a, const GridFunction& b, double theta) {
  if (!(a.grid() == b.grid())) throw ParameterError("blend: grid mismatch");
  if (theta == 0.0) return a;
  if (theta == 1.0) return b;
  std::vector<double> out(a.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (1.0 - theta) * a[k] + theta * b[k];
  return GridFunction(a.grid(), std::move(out));
}

GridFunction add_constant(const GridFunction& v, double c) {
  std::vector<double> out(v.values().begin(), v.values().end());
  for (double& x : out) x += c;
  return GridFunction(v.grid(), std::move(out));
}

namespace {

void check_axis(const TorusGrid& g, int axis) {
  if (axis < 0 || axis >= g.dim()) {
    throw ParameterError("axis " + std::to_string(axis) + " out of range for dimension " +
                         std::to_string(g.dim()));
  }
}

}  // namespace

GridFunction forward_diff(const GridFunction& v, int axis) {
  const auto& g = v.grid();
  check_axis(g, axis);
  const double inv_h = static_cast<double>(g.nodes_per_axis());
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (v[g.shifted(k, axis, 1)] - v[k]) * inv_h;
  return GridFunction(g, std::move(out));
}

GridFunction backward_diff(const GridFunction& v, int axis) {
  const auto& g = v.grid();
  check_axis(g, axis);
  const double inv_h = static_cast<double>(g.nodes_per_axis());
  std::vector<double> out(v.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = (v[k] - v[g.shifted(k, axis, -1)]) * inv_h;
  return GridFunction(g, std::move(out));
}

Point periodize(const Point& x) {
  Point y(x.dim());
  for (int i = 0; i < x.dim(); ++i) {
    if (!std::isfinite(x[i])) throw ParameterError("periodize: non-finite coordinate");
    double r = x[i] - std::floor(x[i]);
    // x slightly below an integer can round up to exactly 1.
    y[i] = r >= 1.0 ? 0.0 : r;
  }
  return y;
}

namespace {

// x * I, snapped to the nearest integer when within a few ulps of it, so that
// nodes computed as k * h land exactly on node k.
inline double cell_coordinate(double x, double scale) {
  const double s = x * scale;
  const double r = std::round(s);
  return std::abs(s - r) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, r) ? r : s;
}

}  // namespace

double interpolate_unchecked(std::span<const double> values, const TorusGrid& grid, const Point& x) {
  const long n = grid.nodes_per_axis();
  const double scale = static_cast<double>(n);
  if (grid.dim() == 1) {
    const double s = cell_coordinate(x[0], scale);
    const double fl = std::floor(s);
    long cell = static_cast<long>(fl);
    double theta = s - fl;
    if (cell >= n || cell < 0) {
      cell %= n;
      if (cell < 0) cell += n;
    }
    const long next = cell + 1 == n ? 0 : cell + 1;
    return (1.0 - theta) * values[static_cast<std::size_t>(cell)] + theta * values[static_cast<std::size_t>(next)];
  }

  const int d = grid.dim();
  std::array<std::size_t, kMaxDim> lo{};
  std::array<std::size_t, kMaxDim> hi{};
  std::array<double, kMaxDim> theta{};
  for (int a = 0; a < d; ++a) {
    const double s = cell_coordinate(x[a], scale);
    const double fl = std::floor(s);
    long cell = static_cast<long>(fl) % n;
    if (cell < 0) cell += n;
    theta[a] = s - fl;
    lo[a] = static_cast<std::size_t>(cell) * grid.stride(a);
    hi[a] = static_cast<std::size_t>(cell + 1 == n ? 0 : cell + 1) * grid.stride(a);
  }
  double acc = 0.0;
  const unsigned corners = 1u << d;
  for (unsigned sigma = 0; sigma < corners; ++sigma) {
    double w = 1.0;
    std::size_t k = 0;
    for (int a = 0; a < d; ++a) {
      if (sigma & (1u << a)) {
        w *= theta[a];
        k += hi[a];
      } else {
        w *= 1.0 - theta[a];
        k += lo[a];
      }
    }
    acc += w * values[k];
  }
  return acc;
}

double interpolate(const GridFunction& v, const Point& x) {
  if (x.dim() != v.grid().dim()) throw ParameterError("interpolate: point dimension mismatch");
  for (double c : x) {
    if (!std::isfinite(c)) throw ParameterError("interpolate: non-finite coordinate");
  }
  return interpolate_unchecked(v.values(), v.grid(), x);
}

GridFunction restrict_to(const GridFunction& fine, const TorusGrid& coarse) {
  if (fine.grid().dim() != coarse.dim()) throw ParameterError("restrict_to: dimension mismatch");
  const auto& fg = fine.grid();
  std::vector<double> out(coarse.size());
  if (fg.nodes_per_axis() % coarse.nodes_per_axis() == 0) {
    const long ratio = fg.nodes_per_axis() / coarse.nodes_per_axis();
    for (std::size_t k = 0; k < out.size(); ++k) {
      MultiIndex m = coarse.multi(k);
      for (int a = 0; a < m.dim; ++a) m[a] *= ratio;
      out[k] = fine[fg.flat(m)];
    }
  } else {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] = interpolate(fine, coarse.node(k));
  }
  return GridFunction(coarse, std::move(out));
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

void write_csv(std::ostream& os, const GridFunction& v) {
  const auto& g = v.grid();
  os << "# d=" << g.dim() << " I=" << g.nodes_per_axis() << '\n';
  for (std::size_t k = 0; k < v.size(); ++k) {
    const MultiIndex m = g.multi(k);
    for (int a = 0; a < m.dim; ++a) os << m[a] << ',';
    os << format_double(v[k]) << '\n';
  }
}

GridFunction read_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw ParameterError("read_csv: empty input");
  int d = 0;
  int n = 0;
  if (std::sscanf(line.c_str(), "# d=%d I=%d", &d, &n) != 2) {
    throw ParameterError("read_csv: bad header '" + line + "'");
  }
  TorusGrid grid(d, n);
  std::vector<double> values(grid.size(), std::numeric_limits<double>::quiet_NaN());
  std::vector<char> seen(grid.size(), 0);
  std::size_t lines = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    std::string field;
    MultiIndex m;
    m.dim = d;
    for (int a = 0; a < d; ++a) {
      if (!std::getline(ss, field, ',')) throw ParameterError("read_csv: short line '" + line + "'");
      m[a] = std::stol(field);
      if (m[a] < 0 || m[a] >= n) throw ParameterError("read_csv: index out of range in '" + line + "'");
    }
    if (!std::getline(ss, field)) throw ParameterError("read_csv: missing value in '" + line + "'");
    const std::size_t k = grid.flat(m);
    values[k] = std::stod(field);
    seen[k] = 1;
    ++lines;
  }
  if (lines != grid.size() || std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw ParameterError("read_csv: expected one line per node");
  }
  return GridFunction(grid, std::move(values));
}

}  // namespace hjt
