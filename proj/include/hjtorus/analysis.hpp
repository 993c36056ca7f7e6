#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hjtorus/torus_grid.hpp"

namespace hjt {

// Sum in a fixed pairwise order, independent of thread count.
double pairwise_sum(std::span<const double> x);

// (sum_i |a_i - b_i|^p h^d)^{1/p}, or max_i |a_i - b_i| for p = +inf.
double lp_error(const GridFunction& a, const GridFunction& b, double p);

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
  std::vector<std::size_t> dropped;  // indices of zero-error levels left out
};

// Least-squares fit of log(error) against log(eps). eps must be strictly
// decreasing; zero errors are dropped (FitError if fewer than 3 remain).
RateFit rate_fit(std::span<const std::pair<double, double>> pairs);

// max over nodes x and shifts k in {h e_i, 2h e_i, h(e_i + e_j), h(e_i - e_j), i < j}
// of (v(x+k) + v(x-k) - 2 v(x)) / |k|^2.
double semiconcavity_estimate(const GridFunction& v);

// max over axes and nodes of |delta_h^{(i)} v|.
double lipschitz_estimate(const GridFunction& v);

// h^d sum over nodes of the Frobenius norm of the second-difference matrix.
double hessian_tv_estimate(const GridFunction& v);

// Per axis: h^d sum_x |delta_h^{(i)} v(x) - (v(x + h e_i) - v(x - h e_i)) / (2h)|.
std::vector<double> fd_gap_l1(const GridFunction& v);

// lp <= l1^{1/p} linf^{1 - 1/p} (1 + 1e-9)
bool interpolation_check(double l1, double linf, double lp, double p);

// Norms reported in every error table, in column order.
inline constexpr std::array<double, 4> kReportNorms = {1.0, 2.0, 4.0, std::numeric_limits<double>::infinity()};
inline constexpr std::array<const char*, 4> kReportNormNames = {"L1", "L2", "L4", "Linf"};

struct LevelErrors {
  int nodes = 0;
  double h = 0.0;
  double dt = 0.0;
  double eps = 0.0;
  std::array<double, 4> errors{};  // indexed like kReportNorms
};

struct ErrorReport {
  std::vector<LevelErrors> levels;
  std::array<RateFit, 4> fits{};
  std::vector<std::string> notes;
};

// Fits every norm column against eps; levels must be ordered coarse to fine.
ErrorReport make_error_report(std::vector<LevelErrors> levels);

// "level,h,dt,eps,L1,L2,L4,Linf" rows, then a "# fit" footer with one
// "norm,slope,intercept,r2" row per norm.
void write_error_report_csv(std::ostream& os, const ErrorReport& report);

}  // namespace hjt
