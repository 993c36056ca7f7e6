#include "hjtorus/fd_solver.hpp"

#include <cmath>
#include <optional>
#include <ostream>

#include "hjtorus/analysis.hpp"
#include "hjtorus/parallel.hpp"
#include "hjtorus/time_slot.hpp"

namespace hjt {

FdParams make_fd_params(const TorusGrid& grid, NumericalHamiltonianPtr flux, double slope_budget, double final_time,
                        int n_steps, bool enforce_cfl) {
  if (!flux) throw ParameterError("make_fd_params: missing numerical Hamiltonian");
  if (!(final_time >= 0.0) || !std::isfinite(final_time)) throw ParameterError("make_fd_params: T must be >= 0");
  if (n_steps < 0) throw ParameterError("make_fd_params: N must be >= 0");
  if (n_steps == 0 && final_time != 0.0) throw ParameterError("make_fd_params: N = 0 requires T = 0");
  if (!(slope_budget > 0.0)) throw ParameterError("make_fd_params: slope budget R must be > 0");
  const double dt = n_steps == 0 ? 0.0 : final_time / n_steps;
  if (n_steps > 0) {
    if (!(dt > 0.0)) throw ParameterError("make_fd_params: dt must be > 0");
    const CflBound cfl = cfl_bound(*flux, slope_budget, grid.spacing(), grid.dim());
    if (enforce_cfl && dt > cfl.dt_max * (1.0 + 1e-12)) {
      throw PreconditionError("CFL condition violated: dt = " + format_double(dt) +
                              " exceeds dt_max = " + format_double(cfl.dt_max) + " (h = " +
                              format_double(grid.spacing()) + ", M_F = " + format_double(cfl.max_partial_sum) + ")");
    }
  }
  return FdParams{grid, dt, n_steps, std::move(flux), slope_budget};
}

int steps_for(double final_time, double dt_target) {
  if (!(dt_target > 0.0)) throw ParameterError("steps_for: dt must be > 0");
  if (final_time == 0.0) return 0;
  const double r = final_time / dt_target;
  int n = static_cast<int>(std::ceil(r - 1e-9 * r));
  return std::max(n, 1);
}

GridFunction fd_step(const GridFunction& u, const FdParams& params) {
  const auto& g = u.grid();
  if (!(g == params.grid)) throw ParameterError("fd_step: grid mismatch");
  const int d = g.dim();
  const double inv_h = static_cast<double>(g.nodes_per_axis());
  const double budget = params.slope_budget * (1.0 + 1e-10) + 1e-14;

  for (std::size_t k = 0; k < u.size(); ++k) {
    for (int a = 0; a < d; ++a) {
      const double s = (u[g.shifted(k, a, 1)] - u[k]) * inv_h;
      if (std::abs(s) > budget) {
        throw InvariantViolation("discrete slope " + format_double(s) + " at node " + std::to_string(k) +
                                 " exceeds the budget R = " + format_double(params.slope_budget));
      }
    }
  }

  const NumericalHamiltonian& flux = *params.flux;
  std::vector<double> out(u.size());
  parallel_for(u.size(), [&](std::size_t k) {
    Point p(d);
    Point q(d);
    for (int a = 0; a < d; ++a) {
      p[a] = -(u[g.shifted(k, a, 1)] - u[k]) * inv_h;
      q[a] = (u[k] - u[g.shifted(k, a, -1)]) * inv_h;
    }
    out[k] = u[k] - params.dt * flux.eval(p, q);
  });
  return GridFunction(g, std::move(out));
}

FdStepDiagnostics diagnose(int step, const GridFunction& u) {
  return {step, lipschitz_estimate(u), semiconcavity_estimate(u), u.sup_norm()};
}

namespace {

void check_datum(const InitialDatum& g, const FdParams& params) {
  if (g.dim() != params.grid.dim()) throw ParameterError("fd_solve: datum dimension does not match the grid");
  if (!std::isfinite(g.lipschitz_bound()) || !std::isfinite(g.semiconcavity_bound())) {
    throw PreconditionError("fd_solve: datum " + g.describe() + " is not Lipschitz and semiconcave");
  }
}

}  // namespace

void fd_march(const GridFunction& u0, const FdParams& params,
              const std::function<bool(int, const GridFunction&)>& observe) {
  GridFunction u = u0;
  if (!observe(0, u)) return;
  for (int n = 0; n < params.n_steps; ++n) {
    u = fd_step(u, params);
    if (!observe(n + 1, u)) return;
  }
}

FdTrajectory fd_solve(const InitialDatum& g, const FdParams& params) {
  check_datum(g, params);
  FdTrajectory traj{params, {}, {}};
  traj.levels.reserve(static_cast<std::size_t>(params.n_steps) + 1);
  traj.levels.push_back(GridFunction::sample(params.grid, [&](const Point& x) { return g.eval(x); }));
  traj.diagnostics.push_back(diagnose(0, traj.levels.back()));
  for (int n = 0; n < params.n_steps; ++n) {
    try {
      traj.levels.push_back(fd_step(traj.levels.back(), params));
    } catch (const InvariantViolation& e) {
      throw FdSolveError("step " + std::to_string(n) + ": " + e.what(), n, std::move(traj));
    }
    traj.diagnostics.push_back(diagnose(n + 1, traj.levels.back()));
  }
  return traj;
}

GridFunction time_interpolate(std::span<const GridFunction> levels, double dt, double t) {
  if (levels.empty()) throw ParameterError("time_interpolate: no levels");
  const int n_steps = static_cast<int>(levels.size()) - 1;
  const TimeSlot slot = time_slot(n_steps, dt, t);
  if (slot.theta == 0.0) return levels[static_cast<std::size_t>(slot.n)];
  return blend(levels[static_cast<std::size_t>(slot.n)], levels[static_cast<std::size_t>(slot.n) + 1], slot.theta);
}

GridFunction time_interpolate(const FdTrajectory& traj, double t) {
  return time_interpolate(traj.levels, traj.params.dt, t);
}

std::vector<GridFunction> fd_snapshots(const InitialDatum& g, const FdParams& params, std::span<const double> times) {
  check_datum(g, params);
  std::vector<TimeSlot> slots;
  int last_needed = 0;
  for (double t : times) {
    slots.push_back(time_slot(params.n_steps, params.dt, t));
    last_needed = std::max(last_needed, slots.back().n + (slots.back().theta > 0.0 ? 1 : 0));
  }
  std::vector<std::optional<GridFunction>> out(times.size());
  std::optional<GridFunction> prev;
  const GridFunction u0 = GridFunction::sample(params.grid, [&](const Point& x) { return g.eval(x); });
  fd_march(u0, params, [&](int n, const GridFunction& u) {
    for (std::size_t i = 0; i < slots.size(); ++i) {
      if (slots[i].n == n && slots[i].theta == 0.0) out[i] = u;
      if (slots[i].n + 1 == n && slots[i].theta > 0.0) out[i] = blend(*prev, u, slots[i].theta);
    }
    prev = u;
    return n < last_needed;
  });
  std::vector<GridFunction> result;
  for (auto& o : out) result.push_back(std::move(*o));
  return result;
}

void write_diagnostics_csv(std::ostream& os, std::span<const FdStepDiagnostics> diagnostics) {
  os << "# semiconcavity over lattice shifts {h e_i, 2h e_i, h(e_i+e_j), h(e_i-e_j)}\n";
  os << "step,max_slope,semiconcavity,sup_norm\n";
  for (const auto& d : diagnostics) {
    os << d.step << ',' << format_double(d.max_slope) << ',' << format_double(d.semiconcavity) << ','
       << format_double(d.sup_norm) << '\n';
  }
}

}  // namespace hjt
