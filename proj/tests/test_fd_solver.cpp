#include <cmath>
#include <sstream>

#include "doctest.h"
#include "gen.hpp"
#include "hjtorus/analysis.hpp"
#include "hjtorus/error.hpp"
#include "hjtorus/experiment.hpp"
#include "hjtorus/fd_solver.hpp"
#include "hjtorus/oracle.hpp"
#include "hjtorus/parallel.hpp"
#include "hjtorus/problem.hpp"

using namespace hjt;

namespace {

// H0(p) = |p|^2 / 2 + 1, to exercise H(0) != 0.
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

GridFunction line(std::vector<double> v) {
  const int n = static_cast<int>(v.size());
  return GridFunction(make_grid(1, n), std::move(v));
}

FdParams cosine_level(int nodes, double final_time) {
  Problem prob;
  prob.final_time = final_time;
  prob.hamiltonian = quadratic_hamiltonian(1.0);
  prob.potential = cosine_potential(0.0, 1);
  prob.datum = cosine_datum(1.0, 1, 1);
  Level level;
  level.nodes = nodes;
  return build_fd_level(prob, FdSettings{}, Coupling{}, level);
}

}  // namespace

TEST_CASE("fd_step on constants") {
  const auto grid = make_grid(2, 8);
  const auto c = GridFunction::constant(grid, 1.5);
  const auto h = quadratic_hamiltonian(1.0);
  const FdParams params = make_fd_params(grid, lax_friedrichs(h, 1.0), 1.0, 0.03, 1);
  const auto next = fd_step(c, params);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(next[k] == 1.5);

  auto lifted = std::make_shared<LiftedQuadratic>();
  const FdParams lp = make_fd_params(grid, lax_friedrichs(lifted, 1.0), 1.0, 0.03, 1);
  const auto shifted = fd_step(c, lp);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(shifted[k] == doctest::Approx(1.5 - 0.03 * 1.0));
}

TEST_CASE("fd_step matches a hand-evaluated stencil") {
  // u = (0, 1/4, 1/2, 1/4), h = 1/4, alpha = 1, dt = 0.1:
  //   node 0: p = -1, q = -1 -> F = -2   -> 0.2
  //   node 1: p = -1, q =  1 -> F = 0.5  -> 0.2
  //   node 2: p =  1, q =  1 -> F = 2    -> 0.3
  //   node 3: p =  1, q = -1 -> F = 0.5  -> 0.2
  const auto u = line({0.0, 0.25, 0.5, 0.25});
  const FdParams params = make_fd_params(u.grid(), lax_friedrichs(quadratic_hamiltonian(1.0), 1.0), 1.0, 0.1, 1);
  const auto next = fd_step(u, params);
  const double expected[] = {0.2, 0.2, 0.3, 0.2};
  for (int k = 0; k < 4; ++k) CHECK(next[k] == doctest::Approx(expected[k]).epsilon(1e-14));

  // Separable flux on the same data: F = H(-p) 1_{p>0} + H(q) 1_{q>0}.
  //   node 0: 0 -> 0;  node 1: H(1) = 0.5 -> 0.2;  node 2: H(-1) + H(1) = 1 -> 0.4;  node 3: H(-1) = 0.5 -> 0.2
  const FdParams sp = make_fd_params(u.grid(), separable_1d(quadratic_hamiltonian(1.0)), 1.0, 0.1, 1);
  const auto ns = fd_step(u, sp);
  const double expected_sep[] = {0.0, 0.2, 0.4, 0.2};
  for (int k = 0; k < 4; ++k) CHECK(ns[k] == doctest::Approx(expected_sep[k]).epsilon(1e-14));
}

TEST_CASE("parameter validation") {
  const auto grid = make_grid(1, 10);
  const auto lf = lax_friedrichs(quadratic_hamiltonian(1.0), 0.5);
  // dt_max = h / (2 alpha) = 0.1
  CHECK_NOTHROW(make_fd_params(grid, lf, 1.0, 0.1, 1));
  try {
    make_fd_params(grid, lf, 1.0, 0.5, 2);
    FAIL("expected a CFL violation");
  } catch (const PreconditionError& e) {
    CHECK(std::string(e.what()).find("dt_max") != std::string::npos);
  }
  CHECK_NOTHROW(make_fd_params(grid, lf, 1.0, 0.5, 2, false));
  CHECK_THROWS_AS(make_fd_params(grid, lf, 1.0, 0.5, 0), ParameterError);
  CHECK_THROWS_AS(make_fd_params(grid, lf, 0.0, 0.1, 1), ParameterError);
  CHECK_THROWS_AS(make_fd_params(grid, nullptr, 1.0, 0.1, 1), ParameterError);
  CHECK(steps_for(0.5, 0.1) == 5);
  CHECK(steps_for(0.5, 0.11) == 5);
  CHECK(steps_for(0.5, 0.099) == 6);
}

TEST_CASE("slope budget violations") {
  const auto u = line({0.0, 1.0, 0.0, 1.0});  // slope 4
  const FdParams params = make_fd_params(u.grid(), lax_friedrichs(quadratic_hamiltonian(1.0), 0.5), 1.0, 0.01, 1);
  CHECK_THROWS_AS(fd_step(u, params), InvariantViolation);

  const auto grid = make_grid(1, 32);
  const FdParams tight = make_fd_params(grid, lax_friedrichs(quadratic_hamiltonian(1.0), 0.5), 0.5, 0.02, 2);
  try {
    fd_solve(*cosine_datum(1.0, 1, 1), tight);
    FAIL("expected FdSolveError");
  } catch (const FdSolveError& e) {
    CHECK(e.step() == 0);
    CHECK(e.partial().levels.size() == 1);
  }
  CHECK_THROWS_AS(fd_solve(*tent_datum(1.0, 1), tight), PreconditionError);
}

TEST_CASE("fd_solve basics") {
  const auto grid = make_grid(1, 16);
  const auto lf = lax_friedrichs(quadratic_hamiltonian(1.0), 0.5);
  const auto g = cosine_datum(1.0, 1, 1);
  const auto empty = fd_solve(*g, make_fd_params(grid, lf, 7.0, 0.0, 0));
  REQUIRE(empty.levels.size() == 1);
  for (std::size_t k = 0; k < grid.size(); ++k) CHECK(empty.levels[0][k] == g->eval(grid.node(k)));

  const auto zero = fd_solve(*constant_datum(0.0, 1), make_fd_params(grid, lf, 1.0, 0.1, 20));
  CHECK(zero.levels.size() == 21);
  CHECK(zero.diagnostics.size() == 21);
  for (const auto& level : zero.levels) CHECK(level.sup_norm() == 0.0);
}

TEST_CASE("fd_solve approaches the Hopf-Lax solution") {
  HopfLaxProblem hl;
  hl.datum = cosine_datum(1.0, 1, 1);
  hl.hamiltonian = quadratic_hamiltonian(1.0);
  // C of the envelope C eps^{1/2} is calibrated on the coarsest level; finer
  // levels must stay inside it.
  double previous = INFINITY;
  double constant = 0.0;
  for (int nodes : {64, 128, 256}) {
    const FdParams params = cosine_level(nodes, 0.5);
    const auto traj = fd_solve(*hl.datum, params);
    const auto exact = hopf_lax_grid(hl, params.grid, 0.5);
    const double eps = params.grid.spacing() + params.dt;
    const double linf = lp_error(traj.levels.back(), exact, INFINITY);
    if (constant == 0.0) constant = linf / std::sqrt(eps);
    CHECK(linf <= constant * std::sqrt(eps) * (1.0 + 1e-12));
    CHECK(linf < previous);
    previous = linf;
  }
}

TEST_CASE("time_interpolate") {
  const auto grid = make_grid(1, 4);
  std::vector<GridFunction> levels = {GridFunction::constant(grid, 0.0), GridFunction::constant(grid, 1.0),
                                      GridFunction::constant(grid, 3.0)};
  CHECK(time_interpolate(levels, 0.5, 0.5)[2] == 1.0);
  CHECK(time_interpolate(levels, 0.5, 1.0)[2] == 3.0);
  CHECK(time_interpolate(levels, 0.5, 0.75)[0] == doctest::Approx(2.0));
  std::vector<GridFunction> two(levels.begin(), levels.begin() + 2);
  CHECK(time_interpolate(two, 1.0, 0.25)[1] == doctest::Approx(0.25));
  CHECK_THROWS_AS(time_interpolate(levels, 0.5, 1.5), ParameterError);
  CHECK_THROWS_AS(time_interpolate(levels, 0.5, -0.1), ParameterError);

  const FdParams params = cosine_level(32, 0.25);
  const auto traj = fd_solve(*cosine_datum(1.0, 1, 1), params);
  const int n = params.n_steps / 2;
  const auto exact_level = time_interpolate(traj, n * params.dt);
  for (std::size_t k = 0; k < exact_level.size(); ++k) CHECK(exact_level[k] == traj.levels[n][k]);
  const double times[] = {0.0, n * params.dt, 0.25};
  const auto snaps = fd_snapshots(*cosine_datum(1.0, 1, 1), params, times);
  REQUIRE(snaps.size() == 3);
  for (std::size_t k = 0; k < snaps[1].size(); ++k) {
    CHECK(snaps[1][k] == traj.levels[n][k]);
    CHECK(snaps[2][k] == traj.levels.back()[k]);
  }
}

TEST_CASE("property: discrete Lipschitz, stability and semiconcavity along random trajectories") {
  auto r = hjt::testing::rng(2024);
  const auto h = quadratic_hamiltonian(1.0);
  for (int trial = 0; trial < 30; ++trial) {
    const int dim = hjt::testing::uniform_int(r, 1, 2);
    const auto g = random_trig_datum(r, dim, hjt::testing::uniform(r, 0.5, 3.0));
    const auto grid = make_grid(dim, dim == 1 ? 48 : 16);
    const auto g0 = GridFunction::sample(grid, [&](const Point& x) { return g->eval(x); });
    const double R = 1.05 * lipschitz_estimate(g0);
    const auto lf = lax_friedrichs(h, 1.1 * suggest_alpha(*h, R, dim));
    const double dt = 0.9 * cfl_bound(*lf, R, grid.spacing(), dim).dt_max;
    const int n = 20;
    const auto traj = fd_solve(*g, make_fd_params(grid, lf, R, n * dt, n));
    const double lip0 = lipschitz_estimate(traj.levels[0]);
    const double sup0 = traj.levels[0].sup_norm();
    double conc = semiconcavity_estimate(traj.levels[0]);
    for (int k = 1; k <= n; ++k) {
      CHECK(lipschitz_estimate(traj.levels[k]) <= lip0 + 1e-10);
      CHECK(traj.levels[k].sup_norm() <= sup0 + 1e-10);  // H(0) = 0
      const double c = semiconcavity_estimate(traj.levels[k]);
      CHECK(c <= conc + 1e-9);
      conc = c;
    }
  }
}

TEST_CASE("property: comparison and constant shift of one step") {
  auto r = hjt::testing::rng(77);
  const auto h = quadratic_hamiltonian(1.0);
  const auto grid = make_grid(1, 32);
  const double R = 4.0;
  const auto lf = lax_friedrichs(h, 1.1 * suggest_alpha(*h, R, 1));
  const double dt = 0.9 * cfl_bound(*lf, R, grid.spacing(), 1).dt_max;
  const FdParams params = make_fd_params(grid, lf, R, dt, 1);
  for (int trial = 0; trial < 100; ++trial) {
    // Random walks with slopes in [-R/2, R/2] closed up periodically.
    std::vector<double> a(32), b(32);
    double s = 0.0;
    for (int k = 0; k < 32; ++k) {
      a[k] = s;
      s += hjt::testing::uniform(r, -0.5, 0.5) * R * grid.spacing();
    }
    const double drift = s / 32.0;
    for (int k = 0; k < 32; ++k) a[k] -= drift * k;
    for (int k = 0; k < 32; ++k) b[k] = a[k] + hjt::testing::uniform(r, 0.0, 0.4 * R * grid.spacing());
    const GridFunction u(grid, a), v(grid, b);
    if (lipschitz_estimate(v) > R) continue;
    const auto su = fd_step(u, params), sv = fd_step(v, params);
    for (int k = 0; k < 32; ++k) CHECK(su[k] <= sv[k] + 1e-12);
    const double c = hjt::testing::uniform(r, -5.0, 5.0);
    const auto shifted = fd_step(add_constant(u, c), params);
    for (int k = 0; k < 32; ++k) CHECK(shifted[k] == doctest::Approx(su[k] + c).epsilon(1e-13));
  }
}

TEST_CASE("results are bit-identical across thread counts") {
  const auto g = cosine_datum(1.0, 1, 2);
  const auto h = quadratic_hamiltonian(1.0);
  const auto grid = make_grid(2, 40);
  const double R = 1.05 * lipschitz_estimate(GridFunction::sample(grid, [&](const Point& x) { return g->eval(x); }));
  const auto lf = lax_friedrichs(h, 1.1 * suggest_alpha(*h, R, 2));
  const double dt = 0.9 * cfl_bound(*lf, R, grid.spacing(), 2).dt_max;
  const FdParams params = make_fd_params(grid, lf, R, 10 * dt, 10);
  std::string text[2];
  for (int i = 0; i < 2; ++i) {
    set_thread_count(i == 0 ? 1 : 4);
    const auto traj = fd_solve(*g, params);
    std::ostringstream os;
    write_csv(os, traj.levels.back());
    write_diagnostics_csv(os, traj.diagnostics);
    text[i] = os.str();
  }
  set_thread_count(1);
  CHECK(text[0] == text[1]);
}
