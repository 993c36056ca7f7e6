#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "gen.hpp"
#include "hjtorus/analysis.hpp"
#include "hjtorus/error.hpp"
#include "hjtorus/hamiltonian.hpp"

using namespace hjt;
using hjt::testing::random_grid_function;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = INFINITY;

GridFunction line(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  return GridFunction(make_grid(1, n), std::move(v));
}

GridFunction sample(const TorusGrid& grid, const InitialDatum& g) {
  return GridFunction::sample(grid, [&](const Point& x) { return g.eval(x); });
}

}  // namespace

TEST_CASE("lp_error examples") {
  const auto a = line({1.0, 2.0, 3.0, 4.0});
  for (double p : {1.0, 2.0, 4.0, kInf}) CHECK(lp_error(a, a, p) == 0.0);
  const auto b = line({3.0, 4.0, 5.0, 6.0});
  for (double p : {1.0, 2.0, 4.0, kInf}) CHECK(lp_error(a, b, p) == doctest::Approx(2.0));
  const auto z = line({0.0, 0.0, 0.0, 0.0});
  const auto e = line({0.0, 1.0, 0.0, 0.0});
  CHECK(lp_error(z, e, 1.0) == doctest::Approx(0.25));
  CHECK(lp_error(z, e, kInf) == 1.0);
  CHECK(lp_error(z, e, 2.0) == doctest::Approx(0.5));
  CHECK(lp_error(z, e, 4.0) == doctest::Approx(std::pow(0.25, 0.25)));
  CHECK_THROWS_AS(lp_error(z, line({0.0, 1.0}), 1.0), ParameterError);
  CHECK_THROWS_AS(lp_error(z, e, 0.5), ParameterError);
}

TEST_CASE("property: lp_error is a metric and the norms are ordered") {
  auto r = hjt::testing::rng(61);
  for (int trial = 0; trial < 100; ++trial) {
    const int dim = hjt::testing::uniform_int(r, 1, 3);
    const TorusGrid g = make_grid(dim, hjt::testing::uniform_int(r, 2, dim == 3 ? 6 : 16));
    const auto a = random_grid_function(r, g, -1.0, 1.0);
    const auto b = random_grid_function(r, g, -1.0, 1.0);
    const auto c = random_grid_function(r, g, -1.0, 1.0);
    double previous = 0.0;
    for (double p : {1.0, 2.0, 4.0, kInf}) {
      const double ab = lp_error(a, b, p);
      CHECK(ab == lp_error(b, a, p));
      CHECK(ab <= lp_error(a, c, p) + lp_error(c, b, p) + 1e-12);
      CHECK(ab >= previous - 1e-12);
      previous = ab;
    }
    const double l1 = lp_error(a, b, 1.0), linf = lp_error(a, b, kInf);
    CHECK(interpolation_check(l1, linf, lp_error(a, b, 2.0), 2.0));
    CHECK(interpolation_check(l1, linf, lp_error(a, b, 4.0), 4.0));
  }
}

TEST_CASE("pairwise_sum is exact on small integers and order-independent of threads") {
  std::vector<double> v(1000);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<double>(i);
  CHECK(pairwise_sum(v) == 499500.0);
  CHECK(pairwise_sum(std::span<const double>()) == 0.0);
}

TEST_CASE("rate_fit") {
  SUBCASE("exact power laws") {
    for (double slope : {1.0, 0.75, 0.5, 1.5}) {
      std::vector<std::pair<double, double>> pairs;
      for (double eps : {0.1, 0.05, 0.025, 0.0125}) pairs.push_back({eps, 3.0 * std::pow(eps, slope)});
      const RateFit fit = rate_fit(pairs);
      CHECK(std::abs(fit.slope - slope) <= 1e-10);
      CHECK(fit.intercept == doctest::Approx(std::log(3.0)));
      CHECK(fit.r2 == doctest::Approx(1.0).epsilon(1e-12));
    }
  }
  SUBCASE("three noisy points against the normal equations") {
    // x = log eps, y = log err; slope = S_xy / S_xx.
    const std::vector<std::pair<double, double>> pairs = {{0.4, 0.9}, {0.2, 0.5}, {0.1, 0.2}};
    double mx = 0, my = 0;
    for (auto [e, y] : pairs) {
      mx += std::log(e) / 3;
      my += std::log(y) / 3;
    }
    double sxx = 0, sxy = 0, syy = 0;
    for (auto [e, y] : pairs) {
      sxx += (std::log(e) - mx) * (std::log(e) - mx);
      sxy += (std::log(e) - mx) * (std::log(y) - my);
      syy += (std::log(y) - my) * (std::log(y) - my);
    }
    const RateFit fit = rate_fit(pairs);
    CHECK(fit.slope == doctest::Approx(sxy / sxx).epsilon(1e-12));
    CHECK(fit.intercept == doctest::Approx(my - sxy / sxx * mx).epsilon(1e-12));
    CHECK(fit.r2 == doctest::Approx(sxy * sxy / (sxx * syy)).epsilon(1e-12));
  }
  SUBCASE("zero errors are dropped") {
    const std::vector<std::pair<double, double>> pairs = {{0.4, 0.4}, {0.2, 0.0}, {0.1, 0.1}, {0.05, 0.05}};
    const RateFit fit = rate_fit(pairs);
    REQUIRE(fit.dropped.size() == 1);
    CHECK(fit.dropped[0] == 1);
    CHECK(fit.slope == doctest::Approx(1.0));
    const std::vector<std::pair<double, double>> too_few = {{0.4, 0.4}, {0.2, 0.0}, {0.1, 0.1}};
    CHECK_THROWS_AS(rate_fit(too_few), FitError);
  }
  SUBCASE("invalid input") {
    const std::vector<std::pair<double, double>> two = {{0.4, 0.4}, {0.2, 0.2}};
    CHECK_THROWS_AS(rate_fit(two), FitError);
    const std::vector<std::pair<double, double>> unordered = {{0.1, 0.4}, {0.2, 0.2}, {0.05, 0.1}};
    CHECK_THROWS_AS(rate_fit(unordered), ParameterError);
  }
}

TEST_CASE("semiconcavity_estimate") {
  CHECK(semiconcavity_estimate(GridFunction::constant(make_grid(2, 6), 4.0)) == 0.0);

  // v = -(x - 1/2)^2 on I = 8: -2 in the interior, the convex kink at x = 0
  // gives (2 v(1/8) - 2 v(0)) / h^2 = (-9/32 + 1/2) * 64 = 14.
  const auto v = GridFunction::sample(make_grid(1, 8), [](const Point& x) { return -(x[0] - 0.5) * (x[0] - 0.5); });
  CHECK(semiconcavity_estimate(v) == doctest::Approx(14.0));

  const auto c = sample(make_grid(1, 64), *cosine_datum(1.0, 1, 1));
  CHECK(semiconcavity_estimate(c) == doctest::Approx(kTwoPi * kTwoPi).epsilon(0.05));
  CHECK(semiconcavity_estimate(c) <= kTwoPi * kTwoPi);

  // Mixed shifts see the curvature of cos(2 pi (x + y)) along the diagonal.
  const auto d = GridFunction::sample(make_grid(2, 32), [](const Point& x) { return std::cos(kTwoPi * (x[0] + x[1])); });
  CHECK(semiconcavity_estimate(d) == doctest::Approx(2.0 * kTwoPi * kTwoPi).epsilon(0.05));
}

TEST_CASE("lipschitz_estimate") {
  CHECK(lipschitz_estimate(GridFunction::constant(make_grid(1, 5), 1.0)) == 0.0);
  CHECK(lipschitz_estimate(line({0.0, 1.0})) == 2.0);
  CHECK(lipschitz_estimate(sample(make_grid(1, 8), *tent_datum(1.0, 1))) == doctest::Approx(1.0));
  CHECK(lipschitz_estimate(sample(make_grid(2, 16), *tent_datum(3.0, 2))) == doctest::Approx(3.0));
}

TEST_CASE("hessian_tv_estimate") {
  CHECK(hessian_tv_estimate(GridFunction::constant(make_grid(2, 6), 1.0)) == 0.0);
  const auto c = sample(make_grid(1, 128), *cosine_datum(1.0, 1, 1));
  CHECK(hessian_tv_estimate(c) == doctest::Approx(4.0 * kTwoPi).epsilon(0.03));  // 8 pi
}

TEST_CASE("fd_gap_l1 scales like h") {
  CHECK(fd_gap_l1(GridFunction::constant(make_grid(2, 8), 2.0)) == std::vector<double>{0.0, 0.0});
  for (const auto& g : {cosine_datum(1.0, 1, 1), tent_datum(1.0, 1)}) {
    CAPTURE(g->describe());
    double previous = 0.0;
    for (int n : {64, 128, 256, 512}) {
      const double gap = fd_gap_l1(sample(make_grid(1, n), *g))[0];
      if (previous > 0.0) CHECK(previous / gap == doctest::Approx(2.0).epsilon(0.15));
      previous = gap;
    }
  }
  const auto gaps = fd_gap_l1(sample(make_grid(2, 32), *cosine_datum(1.0, 1, 2)));
  REQUIRE(gaps.size() == 2);
  CHECK(gaps[0] == doctest::Approx(gaps[1]));
}

TEST_CASE("interpolation_check") {
  CHECK(interpolation_check(0.0, 0.0, 0.0, 2.0));
  CHECK(interpolation_check(0.3, 0.3, 0.3, 4.0));
  CHECK_FALSE(interpolation_check(0.1, 1.0, 0.9, 2.0));
  CHECK_THROWS_AS(interpolation_check(0.1, 1.0, 0.5, 1.0), ParameterError);
  CHECK_THROWS_AS(interpolation_check(-0.1, 1.0, 0.5, 2.0), ParameterError);
}

TEST_CASE("error report fits every norm and serializes") {
  std::vector<LevelErrors> levels;
  for (int n : {16, 32, 64, 128}) {
    LevelErrors e;
    e.nodes = n;
    e.h = 1.0 / n;
    e.dt = 0.5 / n;
    e.eps = e.h + e.dt;
    e.errors = {e.eps, std::pow(e.eps, 0.75), std::pow(e.eps, 0.625), std::sqrt(e.eps)};
    levels.push_back(e);
  }
  const ErrorReport report = make_error_report(levels);
  CHECK(report.fits[0].slope == doctest::Approx(1.0));
  CHECK(report.fits[1].slope == doctest::Approx(0.75));
  CHECK(report.fits[2].slope == doctest::Approx(0.625));
  CHECK(report.fits[3].slope == doctest::Approx(0.5));
  std::ostringstream os;
  write_error_report_csv(os, report);
  const std::string text = os.str();
  CHECK(text.rfind("level,h,dt,eps,L1,L2,L4,Linf\n", 0) == 0);
  CHECK(text.find("# fit") != std::string::npos);
  CHECK(text.find("norm,slope,intercept,r2") != std::string::npos);
}
