#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "hjtorus/point.hpp"

namespace hjt {

// Multi-index (i_1, ..., i_d) of a grid node. Components are kept in [0, I)
// by the grid; wrapped() reduces arbitrary integers modulo I.
struct MultiIndex {
  std::array<long, kMaxDim> c{};
  int dim = 0;

  long& operator[](int i) { return c[i]; }
  long operator[](int i) const { return c[i]; }

  MultiIndex wrapped(long nodes_per_axis) const {
    MultiIndex m = *this;
    for (int i = 0; i < dim; ++i) {
      long r = m.c[i] % nodes_per_axis;
      m.c[i] = r < 0 ? r + nodes_per_axis : r;
    }
    return m;
  }

  friend bool operator==(const MultiIndex& a, const MultiIndex& b) {
    if (a.dim != b.dim) return false;
    for (int i = 0; i < a.dim; ++i) {
      if (a.c[i] != b.c[i]) return false;
    }
    return true;
  }
};

// Uniform periodic Cartesian grid x_i = h*i on the flat torus [0,1)^d with
// h = 1/I. Storage order is row-major: the last axis is contiguous.
class TorusGrid {
 public:
  TorusGrid(int dim, int nodes_per_axis);

  int dim() const { return dim_; }
  int nodes_per_axis() const { return nodes_; }
  double spacing() const { return h_; }
  std::size_t size() const { return size_; }
  std::size_t stride(int axis) const { return strides_[axis]; }

  std::size_t flat(const MultiIndex& m) const;
  MultiIndex multi(std::size_t flat) const;
  Point node(std::size_t flat) const;

  // Component of node `flat` along `axis`.
  long component(std::size_t flat, int axis) const {
    return static_cast<long>((flat / strides_[axis]) % static_cast<std::size_t>(nodes_));
  }

  // Flat index of the node offset by `offset` cells along `axis`, modulo I.
  std::size_t shifted(std::size_t flat, int axis, long offset) const {
    const long c = component(flat, axis);
    long t = (c + offset) % nodes_;
    if (t < 0) t += nodes_;
    return flat + static_cast<std::size_t>(t) * strides_[axis] -
           static_cast<std::size_t>(c) * strides_[axis];
  }

  friend bool operator==(const TorusGrid& a, const TorusGrid& b) {
    return a.dim_ == b.dim_ && a.nodes_ == b.nodes_;
  }

 private:
  int dim_;
  int nodes_;
  double h_;
  std::size_t size_;
  std::array<std::size_t, kMaxDim> strides_{};
};

TorusGrid make_grid(int dim, int nodes_per_axis);

// Real values on the nodes of a TorusGrid. Immutable after construction; all
// values are finite.
class GridFunction {
 public:
  GridFunction(TorusGrid grid, std::vector<double> values);

  static GridFunction constant(const TorusGrid& grid, double c) {
    return GridFunction(grid, std::vector<double>(grid.size(), c));
  }

  template <class F>
  static GridFunction sample(const TorusGrid& grid, F&& f) {
    std::vector<double> v(grid.size());
    for (std::size_t k = 0; k < v.size(); ++k) v[k] = f(grid.node(k));
    return GridFunction(grid, std::move(v));
  }

  const TorusGrid& grid() const { return grid_; }
  std::span<const double> values() const { return values_; }
  std::size_t size() const { return values_.size(); }
  double operator[](std::size_t k) const { return values_[k]; }
  double at(const MultiIndex& m) const { return values_[grid_.flat(m.wrapped(grid_.nodes_per_axis()))]; }

  double sup_norm() const;
  double max() const;
  double min() const;

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

// (1 - theta) a + theta b, nodewise. Exact copies at theta = 0 and theta = 1.
GridFunction blend(const GridFunction& a, const GridFunction& b, double theta);
GridFunction add_constant(const GridFunction& v, double c);

// delta_h^{(axis)} v(x) = (v(x + h e_axis) - v(x)) / h with periodic wrap.
GridFunction forward_diff(const GridFunction& v, int axis);
// delta_{-h}^{(axis)} v(x) = (v(x) - v(x - h e_axis)) / h.
GridFunction backward_diff(const GridFunction& v, int axis);

// Reduces each component into [0, 1) by x - floor(x).
Point periodize(const Point& x);

// Piecewise-multilinear interpolant on the cell Q_i = x_i + [0,h)^d that
// contains x: a convex combination of the 2^d corner values.
double interpolate(const GridFunction& v, const Point& x);

// Same as interpolate() without the finiteness check on x; used in inner
// loops where x is produced by periodize().
double interpolate_unchecked(std::span<const double> values, const TorusGrid& grid, const Point& x);

// Samples `fine` at the nodes of `coarse` through the interpolant. Exact
// restriction when the coarse nodes are fine nodes.
GridFunction restrict_to(const GridFunction& fine, const TorusGrid& coarse);

// CSV: "# d=<d> I=<I>" then one "i_1,...,i_d,value" line per node.
void write_csv(std::ostream& os, const GridFunction& v);
GridFunction read_csv(std::istream& is);

// Shortest round-trip decimal representation of a double.
std::string format_double(double x);

}  // namespace hjt
