#include <cmath>
#include <filesystem>
#include <numbers>

#include "doctest.h"
#include "gen.hpp"
#include "hjtorus/analysis.hpp"
#include "hjtorus/error.hpp"
#include "hjtorus/oracle.hpp"
#include "hjtorus/sl_solver.hpp"

using namespace hjt;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

HopfLaxProblem cosine_forward() {
  HopfLaxProblem p;
  p.datum = cosine_datum(1.0, 1, 1);
  p.hamiltonian = quadratic_hamiltonian(1.0);
  return p;
}

// H0(p) = |p|^2 / 2 + 1, so that H(0) != 0.
class LiftedQuadratic final : public Hamiltonian {
 public:
  double eval(const Point& p) const override { return 0.5 * dot(p, p) + 1.0; }
  Point grad(const Point& p) const override { return p; }
  double legendre(const Point& a) const override { return 0.5 * dot(a, a) - 1.0; }
  Point legendre_grad(const Point& a) const override { return a; }
  GrowthTag growth_tag() const override { return GrowthTag::quadratic; }
  double legendre_domain_radius() const override { return INFINITY; }
  std::string describe() const override { return "lifted_quadratic"; }
};

// Hopf-Lax value at time s used as a datum, for the semigroup check.
class HopfLaxDatum final : public InitialDatum {
 public:
  HopfLaxDatum(HopfLaxProblem p, double s) : p_(std::move(p)), s_(s) {}
  double eval(const Point& x) const override { return hopf_lax_eval(p_, periodize(x), s_); }
  double lipschitz_bound() const override { return p_.datum->lipschitz_bound(); }
  double semiconcavity_bound() const override { return p_.datum->semiconcavity_bound(); }
  int dim() const override { return p_.dim; }
  std::string describe() const override { return "hopf_lax"; }

 private:
  HopfLaxProblem p_;
  double s_;
};

ReferenceRequest sl_request(double amplitude, int multiplier) {
  ReferenceRequest r;
  r.problem.dim = 1;
  r.problem.final_time = 1.0;
  r.problem.hamiltonian = quadratic_hamiltonian(1.0);
  r.problem.potential = cosine_potential(amplitude, 1);
  r.problem.datum = cosine_datum(1.0, 1, 1);
  r.scheme = SchemeKind::sl;
  r.coupling = {CouplingRule::h_quadratic, 1.0};
  r.finest_nodes = 16;
  r.multiplier = multiplier;
  r.fractions = {0.0, 0.5, 1.0};
  return r;
}

}  // namespace

TEST_CASE("Hopf-Lax trivial data") {
  HopfLaxProblem p = cosine_forward();
  p.datum = constant_datum(0.0, 1);
  CHECK(hopf_lax_eval(p, Point{0.3}, 0.7) == 0.0);
  p.datum = constant_datum(2.0, 2);
  p.dim = 2;
  CHECK(hopf_lax_eval(p, Point{0.3, 0.9}, 0.4) == 2.0);
  p.hamiltonian = std::make_shared<LiftedQuadratic>();
  for (double t : {0.1, 0.5, 2.0}) CHECK(hopf_lax_eval(p, Point{0.2, 0.2}, t) == doctest::Approx(2.0 - t));
}

TEST_CASE("Hopf-Lax at time zero and negative elapsed time") {
  HopfLaxProblem p = cosine_forward();
  CHECK(hopf_lax_eval(p, Point{0.3}, 0.0) == p.datum->eval(Point{0.3}));
  CHECK_THROWS_AS(hopf_lax_eval(p, Point{0.3}, -0.1), ParameterError);
  p.direction = Direction::backward;
  p.final_time = 1.0;
  CHECK(hopf_lax_eval(p, Point{0.3}, 1.0) == p.datum->eval(Point{0.3}));
  CHECK_THROWS_AS(hopf_lax_eval(p, Point{0.3}, 1.5), ParameterError);
  CHECK(hopf_lax_eval(p, Point{0.3}, 0.6) == hopf_lax_eval(cosine_forward(), Point{0.3}, 0.4));
}

TEST_CASE("Hopf-Lax agrees with a dense scan at ten times the resolution") {
  // min_y cos(2 pi y) + (x - y)^2 / (2 t) at x = 0, t = 0.1, y on 10^6 points.
  const double t = 0.1;
  const int samples = 1'000'000;
  double best = INFINITY;
  for (int k = 0; k <= samples; ++k) {
    const double y = -1.0 + 2.0 * k / samples;
    best = std::min(best, std::cos(kTwoPi * y) + y * y / (2.0 * t));
  }
  const double v = hopf_lax_eval(cosine_forward(), Point{0.0}, t);
  CHECK(v <= best + 1e-12);
  CHECK(v == doctest::Approx(best).epsilon(1e-9));
  // Shocks form at t = 1/(2 pi)^2; past it the minimizer is off the peak.
  CHECK(v < 1.0);
}

TEST_CASE("Hopf-Lax window") {
  const HopfLaxProblem p = cosine_forward();
  CHECK(hopf_lax_window(p, 0.1) == doctest::Approx(1.02 * 0.1 * kTwoPi));
  HopfLaxProblem s = p;
  s.hamiltonian = smoothed_norm_hamiltonian(0.5);
  CHECK(hopf_lax_window(s, 0.1) <= 1.02 * 0.1 * 1.0 + 1e-12);
}

TEST_CASE("property: Hopf-Lax semigroup") {
  const HopfLaxProblem p = cosine_forward();
  const double s = 0.05, t = 0.05;
  HopfLaxProblem composed = p;
  composed.datum = std::make_shared<HopfLaxDatum>(p, s);
  composed.samples_per_unit = 1024;
  auto r = hjt::testing::rng(5);
  for (int i = 0; i < 10; ++i) {
    const Point x = hjt::testing::random_point(r, 1, 0.0, 1.0);
    CHECK(std::abs(hopf_lax_eval(composed, x, t) - hopf_lax_eval(p, x, s + t)) <= 2.0 / 4096);
  }
}

TEST_CASE("Hopf-Lax in two dimensions separates for a separable datum") {
  HopfLaxProblem p2 = cosine_forward();
  p2.datum = cosine_datum(1.0, 1, 2);
  p2.dim = 2;
  const HopfLaxProblem p1 = cosine_forward();
  // g and L split over the axes, so u(x, y) = u1(x) + u1(y).
  for (const Point& x : {Point{0.0, 0.5}, Point{0.3, 0.8}}) {
    const double expected = hopf_lax_eval(p1, Point{x[0]}, 0.1) + hopf_lax_eval(p1, Point{x[1]}, 0.1);
    CHECK(hopf_lax_eval(p2, x, 0.1) == doctest::Approx(expected).epsilon(1e-6));
  }
}

TEST_CASE("reference_solve resolution and accuracy") {
  const ReferenceSolution ref8 = reference_solve(sl_request(1.0, 8));
  CHECK(ref8.provenance.nodes == 128);
  CHECK(ref8.provenance.method == "sl_reference");
  CHECK(ref8.snapshots.size() == 3);
  CHECK(ref8.provenance.estimated_accuracy > 0.0);

  ReferenceRequest at64 = sl_request(1.0, 8);
  at64.finest_nodes = 64;
  at64.problem.final_time = 0.1;
  CHECK(reference_solve(at64).provenance.nodes == 512);

  const ReferenceSolution ref16 = reference_solve(sl_request(1.0, 16));
  CHECK(ref16.provenance.estimated_accuracy < ref8.provenance.estimated_accuracy);

  CHECK_THROWS_AS(reference_solve(sl_request(1.0, 4)), ParameterError);
}

TEST_CASE("reference_solve agrees with Hopf-Lax when V = 0") {
  const ReferenceRequest req = sl_request(0.0, 8);
  const ReferenceSolution ref = reference_solve(req);
  HopfLaxProblem hl = cosine_forward();
  hl.direction = Direction::backward;
  hl.final_time = req.problem.final_time;
  const TorusGrid test_grid = make_grid(1, req.finest_nodes);
  for (std::size_t i = 0; i < ref.fractions.size(); ++i) {
    const double t = req.problem.final_time * (1.0 - ref.fractions[i]);
    const double gap = lp_error(restrict_to(ref.snapshots[i], test_grid), hopf_lax_grid(hl, test_grid, t), INFINITY);
    CHECK(gap <= ref.provenance.estimated_accuracy);
  }
}

TEST_CASE("reference_solve caches by description") {
  const auto dir = std::filesystem::temp_directory_path() / "hjtorus_test_oracle_cache";
  std::filesystem::remove_all(dir);
  ReferenceRequest req = sl_request(1.0, 8);
  req.problem.final_time = 0.5;
  req.cache_dir = dir.string();
  const ReferenceSolution first = reference_solve(req);
  CHECK_FALSE(first.provenance.cache_hit);
  const ReferenceSolution second = reference_solve(req);
  CHECK(second.provenance.cache_hit);
  CHECK(second.provenance.estimated_accuracy == first.provenance.estimated_accuracy);
  CHECK(second.provenance.n_steps == first.provenance.n_steps);
  for (std::size_t i = 0; i < first.snapshots.size(); ++i) {
    for (std::size_t k = 0; k < first.snapshots[i].size(); ++k) CHECK(second.snapshots[i][k] == first.snapshots[i][k]);
  }
  ReferenceRequest other = req;
  other.multiplier = 16;
  CHECK(reference_description(other) != reference_description(req));
  CHECK_FALSE(reference_solve(other).provenance.cache_hit);
  std::filesystem::remove_all(dir);

  CHECK(fnv1a("") == 14695981039346656037ull);
  CHECK(fnv1a("a") == 0xaf63dc4c8601ec8cull);
}

TEST_CASE("brute_force_dp") {
  const auto h = quadratic_hamiltonian(1.0);
  const auto v0 = cosine_potential(0.0, 1);
  const auto v = cosine_potential(0.8, 1);
  const std::vector<Point> three = {Point{-1.0}, Point{0.0}, Point{1.0}};

  SUBCASE("constant data") {
    const auto grid = make_grid(1, 4);
    const auto dp = brute_force_dp(GridFunction::constant(grid, 1.25), three, 3, 0.1, *h, *v0);
    REQUIRE(dp.size() == 4);
    for (const auto& level : dp) {
      for (std::size_t k = 0; k < 4; ++k) CHECK(level[k] == 1.25);
    }
  }
  SUBCASE("one and two stages equal restricted sl steps") {
    const auto grid = make_grid(1, 4);
    const auto g = GridFunction(grid, {0.3, -0.2, 0.7, 0.1});
    // dt = h puts every foot of the lattice {-1, 0, 1} on a node, where the
    // interpolant is exact and Bellman recursion matches path enumeration.
    const SlParams params = make_sl_params(grid, h, v, 0.5, 2, 1.0, 3, false, false);
    const auto once = sl_step(g, params, 1).value;
    const auto twice = sl_step(once, params, 0).value;
    const auto dp1 = brute_force_dp(g, three, 1, 0.25, *h, *v);
    const auto dp2 = brute_force_dp(g, three, 2, 0.25, *h, *v);
    // Off the lattice a single stage still matches, since only g is interpolated.
    const SlParams off = make_sl_params(grid, h, v, 0.1, 1, 1.0, 3, false, false);
    CHECK(lp_error(brute_force_dp(g, three, 1, 0.1, *h, *v)[0], sl_step(g, off, 0).value, INFINITY) <= 1e-12);
    CHECK(lp_error(dp1[0], once, INFINITY) <= 1e-12);
    CHECK(lp_error(dp2[1], once, INFINITY) <= 1e-12);
    CHECK(lp_error(dp2[0], twice, INFINITY) <= 1e-12);
    for (std::size_t k = 0; k < 4; ++k) CHECK(dp2[2][k] == g[k]);
  }
  SUBCASE("enumeration budget") {
    std::vector<Point> eleven;
    for (int j = -5; j <= 5; ++j) eleven.push_back(Point{0.1 * j});
    const auto grid = make_grid(1, 4);
    CHECK_THROWS_AS(brute_force_dp(GridFunction::constant(grid, 0.0), eleven, 7, 0.1, *h, *v0), ParameterError);
    CHECK_NOTHROW(brute_force_dp(GridFunction::constant(grid, 0.0), eleven, 6, 0.1, *h, *v0));
    CHECK_THROWS_AS(brute_force_dp(GridFunction::constant(grid, 0.0), {}, 1, 0.1, *h, *v0), ParameterError);
  }
}
