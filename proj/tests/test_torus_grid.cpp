#include <cmath>
#include <sstream>

#include "doctest.h"
#include "gen.hpp"
#include "hjtorus/error.hpp"
#include "hjtorus/parallel.hpp"
#include "hjtorus/torus_grid.hpp"

using namespace hjt;
using hjt::testing::random_grid_function;
using hjt::testing::random_point;
using hjt::testing::uniform;

namespace {

GridFunction line(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  return GridFunction(make_grid(1, n), std::move(v));
}

void check_values(const GridFunction& v, std::vector<double> expected) {
  REQUIRE(v.size() == expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k) CHECK(v[k] == doctest::Approx(expected[k]).epsilon(1e-14));
}

}  // namespace

TEST_CASE("make_grid builds uniform periodic grids") {
  const TorusGrid g = make_grid(1, 8);
  CHECK(g.spacing() == 0.125);
  CHECK(g.size() == 8);
  CHECK(make_grid(2, 4).size() == 16);
  CHECK(make_grid(3, 5).size() == 125);
  CHECK_THROWS_AS(make_grid(1, 1), ParameterError);
  CHECK_THROWS_AS(make_grid(0, 8), ParameterError);
  CHECK_THROWS_AS(make_grid(kMaxDim + 1, 4), ParameterError);
  for (int n : {2, 3, 7, 10, 64, 1000}) CHECK(std::abs(make_grid(1, n).spacing() * n - 1.0) < 1e-15);
}

TEST_CASE("flat and multi indices are inverse, row-major") {
  const TorusGrid g = make_grid(3, 5);
  for (std::size_t k = 0; k < g.size(); ++k) CHECK(g.flat(g.multi(k)) == k);
  MultiIndex m;
  m.dim = 3;
  m[0] = 1;
  m[1] = 2;
  m[2] = 3;
  CHECK(g.flat(m) == 1 * 25 + 2 * 5 + 3);
  MultiIndex w = m;
  w[0] = -4;
  w[2] = 13;
  CHECK(w.wrapped(5) == m);
  CHECK(w.wrapped(5).wrapped(5) == w.wrapped(5));
}

TEST_CASE("grid functions reject non-finite values and wrong sizes") {
  const TorusGrid g = make_grid(1, 4);
  CHECK_THROWS_AS(GridFunction(g, {0.0, 1.0, 2.0}), ParameterError);
  CHECK_THROWS_AS(GridFunction(g, {0.0, NAN, 2.0, 3.0}), InvariantViolation);
}

TEST_CASE("forward and backward differences") {
  SUBCASE("constants are annihilated") {
    const auto c = GridFunction::constant(make_grid(2, 6), 3.5);
    for (int axis = 0; axis < 2; ++axis) {
      CHECK(forward_diff(c, axis).sup_norm() == 0.0);
      CHECK(backward_diff(c, axis).sup_norm() == 0.0);
    }
  }
  SUBCASE("wraparound on a sampled line") {
    check_values(forward_diff(line({0.0, 0.25, 0.5, 0.75}), 0), {1.0, 1.0, 1.0, -3.0});
    check_values(backward_diff(line({0.0, 0.25, 0.5, 0.75}), 0), {-3.0, 1.0, 1.0, 1.0});
  }
  SUBCASE("two nodes") { check_values(forward_diff(line({0.0, 1.0}), 0), {2.0, -2.0}); }
  SUBCASE("axis out of range") {
    CHECK_THROWS_AS(forward_diff(line({0.0, 1.0}), 1), ParameterError);
    CHECK_THROWS_AS(backward_diff(line({0.0, 1.0}), -1), ParameterError);
  }
  SUBCASE("second axis of a 2-d grid") {
    // v(i, j) = j on I = 3: the difference along axis 1 is 3 except at the wrap.
    const TorusGrid g = make_grid(2, 3);
    const auto v = GridFunction::sample(g, [](const Point& x) { return std::round(x[1] * 3.0); });
    const auto d1 = forward_diff(v, 1);
    const auto d0 = forward_diff(v, 0);
    for (std::size_t k = 0; k < g.size(); ++k) {
      CHECK(d0[k] == 0.0);
      CHECK(d1[k] == (g.component(k, 1) == 2 ? -6.0 : 3.0));
    }
  }
}

TEST_CASE("property: differences telescope and are adjoint") {
  auto r = hjt::testing::rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    const int dim = hjt::testing::uniform_int(r, 1, 3);
    const int n = hjt::testing::uniform_int(r, 2, dim == 3 ? 6 : 12);
    const TorusGrid g = make_grid(dim, n);
    const auto v = random_grid_function(r, g, -2.0, 2.0);
    const auto w = random_grid_function(r, g, -2.0, 2.0);
    const double tol = 1e-12 * static_cast<double>(g.size()) * 2.0 / g.spacing();
    for (int axis = 0; axis < dim; ++axis) {
      const auto fv = forward_diff(v, axis);
      const auto bw = backward_diff(w, axis);
      double total = 0.0, lhs = 0.0, rhs = 0.0;
      for (std::size_t k = 0; k < g.size(); ++k) {
        total += fv[k];
        lhs += fv[k] * w[k];
        rhs -= v[k] * bw[k];
      }
      CHECK(std::abs(total) <= tol);
      CHECK(std::abs(lhs - rhs) <= tol * 2.0);
    }
  }
}

TEST_CASE("periodize reduces into the unit cube") {
  CHECK(periodize(Point{1.25})[0] == 0.25);
  CHECK(periodize(Point{-0.25})[0] == 0.75);
  CHECK(periodize(Point{0.0})[0] == 0.0);
  CHECK(periodize(Point{3.0, -2.0}) == Point{0.0, 0.0});
  CHECK_THROWS_AS(periodize(Point{INFINITY}), ParameterError);
  auto r = hjt::testing::rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Point x = random_point(r, 3, -5.0, 5.0);
    const Point y = periodize(x);
    for (double c : y) {
      CHECK(c >= 0.0);
      CHECK(c < 1.0);
    }
    CHECK(periodize(y) == y);
  }
}

TEST_CASE("interpolate") {
  SUBCASE("midpoint of two nodes") { CHECK(interpolate(line({0.0, 1.0}), Point{0.25}) == doctest::Approx(0.5)); }
  SUBCASE("periodic cell between the last and first node") {
    CHECK(interpolate(line({0.0, 1.0}), Point{0.75}) == doctest::Approx(0.5));
    CHECK(interpolate(line({2.0, 0.0, 0.0, 4.0}), Point{0.875}) == doctest::Approx(3.0));
  }
  SUBCASE("partition of unity in 2-d") {
    const auto c = GridFunction::constant(make_grid(2, 5), -1.75);
    auto r = hjt::testing::rng(5);
    for (int i = 0; i < 100; ++i) CHECK(interpolate(c, random_point(r, 2, 0.0, 1.0)) == doctest::Approx(-1.75));
  }
  SUBCASE("x just below 1 stays in the last cell") {
    CHECK(interpolate(line({0.0, 1.0, 2.0, 3.0}), Point{std::nextafter(1.0, 0.0)}) == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("errors") {
    CHECK_THROWS_AS(interpolate(line({0.0, 1.0}), Point{NAN}), ParameterError);
    CHECK_THROWS_AS(interpolate(line({0.0, 1.0}), Point{0.1, 0.2}), ParameterError);
  }
}

TEST_CASE("property: interpolation reproduces nodes, stays within corner values, commutes with constants") {
  auto r = hjt::testing::rng(17);
  for (int trial = 0; trial < 40; ++trial) {
    const int dim = hjt::testing::uniform_int(r, 1, 3);
    const int n = hjt::testing::uniform_int(r, 2, 8);
    const TorusGrid g = make_grid(dim, n);
    const auto v = random_grid_function(r, g, -3.0, 3.0);
    const double c = uniform(r, -10.0, 10.0);
    const auto vc = add_constant(v, c);
    for (std::size_t k = 0; k < g.size(); ++k) CHECK(interpolate(v, g.node(k)) == v[k]);
    for (int i = 0; i < 50; ++i) {
      const Point x = random_point(r, dim, 0.0, 1.0);
      const double h = g.spacing();
      MultiIndex cell;
      cell.dim = dim;
      for (int a = 0; a < dim; ++a) cell[a] = std::min<long>(static_cast<long>(std::floor(x[a] / h)), n - 1);
      double lo = INFINITY, hi = -INFINITY;
      for (int corner = 0; corner < (1 << dim); ++corner) {
        MultiIndex m = cell;
        for (int a = 0; a < dim; ++a) m[a] += (corner >> a) & 1;
        lo = std::min(lo, v.at(m));
        hi = std::max(hi, v.at(m));
      }
      const double y = interpolate(v, x);
      CHECK(y >= lo - 1e-12);
      CHECK(y <= hi + 1e-12);
      CHECK(interpolate(vc, x) == doctest::Approx(y + c).epsilon(1e-12));
    }
  }
}

TEST_CASE("interpolation is exact for data affine on a cell") {
  // Bilinear data a + b x + c y + e x y is reproduced exactly inside any cell
  // that does not straddle the wrap.
  const TorusGrid g = make_grid(2, 8);
  auto f = [](const Point& x) { return 0.5 + 2.0 * x[0] - 1.0 * x[1] + 3.0 * x[0] * x[1]; };
  const auto v = GridFunction::sample(g, f);
  auto r = hjt::testing::rng(23);
  for (int i = 0; i < 200; ++i) {
    const Point x = random_point(r, 2, 0.0, 0.875);
    CHECK(interpolate(v, x) == doctest::Approx(f(x)).epsilon(1e-12));
  }
}

TEST_CASE("restrict_to and blend") {
  const auto fine = GridFunction::sample(make_grid(1, 16), [](const Point& x) { return std::sin(6.0 * x[0]); });
  const auto coarse = restrict_to(fine, make_grid(1, 4));
  for (std::size_t k = 0; k < 4; ++k) CHECK(coarse[k] == fine[4 * k]);
  const auto a = line({0.0, 1.0, 2.0, 3.0});
  const auto b = line({4.0, 4.0, 4.0, 4.0});
  check_values(blend(a, b, 0.25), {1.0, 1.75, 2.5, 3.25});
  CHECK(blend(a, b, 0.0)[3] == 3.0);
  CHECK(blend(a, b, 1.0)[3] == 4.0);
  CHECK_THROWS_AS(blend(a, line({0.0, 1.0}), 0.5), ParameterError);
}

TEST_CASE("csv round trip is exact") {
  auto r = hjt::testing::rng(29);
  const auto v = random_grid_function(r, make_grid(2, 5), -1.0, 1.0);
  std::stringstream ss;
  write_csv(ss, v);
  const std::string text = ss.str();
  CHECK(text.rfind("# d=2 I=5\n0,0,", 0) == 0);
  const auto back = read_csv(ss);
  CHECK(back.grid() == v.grid());
  for (std::size_t k = 0; k < v.size(); ++k) CHECK(back[k] == v[k]);
  std::istringstream bad("# d=1 I=3\n0,1\n1,2\n");
  CHECK_THROWS_AS(read_csv(bad), ParameterError);
}

TEST_CASE("parallel_for covers every index once") {
  set_thread_count(4);
  std::vector<int> hits(1001, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  set_thread_count(1);
  for (int h : hits) CHECK(h == 1);
}
