#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <initializer_list>
#include <string>

#include "hjtorus/error.hpp"

namespace hjt {

inline constexpr int kMaxDim = 4;

// Fixed-capacity real vector of runtime dimension. Used for points of the
// torus, momenta p and controls alpha; lives on the stack so hot loops never
// allocate.
class Point {
 public:
  Point() = default;

  explicit Point(int dim, double fill = 0.0) : dim_(dim) {
    if (dim < 0 || dim > kMaxDim) {
      throw ParameterError("Point dimension must lie in [0, " + std::to_string(kMaxDim) + "]");
    }
    for (int i = 0; i < dim; ++i) c_[i] = fill;
  }

  Point(std::initializer_list<double> values) : Point(static_cast<int>(values.size())) {
    int i = 0;
    for (double v : values) c_[i++] = v;
  }

  int dim() const { return dim_; }
  double& operator[](int i) { return c_[i]; }
  double operator[](int i) const { return c_[i]; }

  const double* begin() const { return c_.data(); }
  const double* end() const { return c_.data() + dim_; }
  double* begin() { return c_.data(); }
  double* end() { return c_.data() + dim_; }

  Point& operator+=(const Point& o) {
    for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
    return *this;
  }
  Point& operator-=(const Point& o) {
    for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
    return *this;
  }
  Point& operator*=(double s) {
    for (int i = 0; i < dim_; ++i) c_[i] *= s;
    return *this;
  }

  friend bool operator==(const Point& a, const Point& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i) {
      if (a.c_[i] != b.c_[i]) return false;
    }
    return true;
  }

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

inline Point operator+(Point a, const Point& b) { return a += b; }
inline Point operator-(Point a, const Point& b) { return a -= b; }
inline Point operator*(double s, Point a) { return a *= s; }
inline Point operator*(Point a, double s) { return a *= s; }
inline Point operator-(Point a) { return a *= -1.0; }

inline double dot(const Point& a, const Point& b) {
  double s = 0.0;
  for (int i = 0; i < a.dim(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm(const Point& a) { return std::sqrt(dot(a, a)); }

inline double norm_inf(const Point& a) {
  double m = 0.0;
  for (double v : a) m = std::max(m, std::abs(v));
  return m;
}

// Unit basis vector e_axis in dimension dim.
inline Point unit(int dim, int axis) {
  Point e(dim);
  e[axis] = 1.0;
  return e;
}

// Lexicographic order, used for deterministic tie-breaking among minimizers.
inline bool lex_less(const Point& a, const Point& b) {
  for (int i = 0; i < a.dim(); ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

}  // namespace hjt
