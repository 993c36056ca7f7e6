#pragma once

#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include "hjtorus/hamiltonian.hpp"
#include "hjtorus/numerical_hamiltonian.hpp"
#include "hjtorus/torus_grid.hpp"

namespace hjt {

// Explicit monotone scheme u_{n+1} = u_n - dt F(-delta_h u_n, delta_{-h} u_n)
// on the grid, for n = 0..N-1 with N dt = T.
struct FdParams {
  TorusGrid grid;
  double dt;
  int n_steps;
  NumericalHamiltonianPtr flux;
  double slope_budget;  // R: every level must have discrete slopes <= R

  double final_time() const { return dt * n_steps; }
};

// Validates the parameters: dt = T / n_steps must satisfy the CFL bound for
// (flux, R, h) unless enforce_cfl is false (test mode only).
FdParams make_fd_params(const TorusGrid& grid, NumericalHamiltonianPtr flux, double slope_budget, double final_time,
                        int n_steps, bool enforce_cfl = true);

// Smallest N with T / N <= dt_target.
int steps_for(double final_time, double dt_target);

struct FdStepDiagnostics {
  int step;
  double max_slope;
  double semiconcavity;  // lattice-shift estimator, see semiconcavity_estimate()
  double sup_norm;
};

struct FdTrajectory {
  FdParams params;
  std::vector<GridFunction> levels;
  std::vector<FdStepDiagnostics> diagnostics;
};

// Raised by fd_solve when a step breaks an invariant; carries the levels
// computed so far.
class FdSolveError : public InvariantViolation {
 public:
  FdSolveError(const std::string& what, int step, FdTrajectory partial)
      : InvariantViolation(what), step_(step), partial_(std::move(partial)) {}
  int step() const { return step_; }
  const FdTrajectory& partial() const { return partial_; }

 private:
  int step_;
  FdTrajectory partial_;
};

// One explicit step. Throws InvariantViolation if a discrete slope of u
// exceeds the budget R.
GridFunction fd_step(const GridFunction& u, const FdParams& params);

// Full trajectory from u_0 = g on the grid, with per-level diagnostics.
FdTrajectory fd_solve(const InitialDatum& g, const FdParams& params);

// Marches from u0 and calls observe(n, u_n) for n = 0..N without storing the
// levels. Stops early if observe returns false.
void fd_march(const GridFunction& u0, const FdParams& params,
              const std::function<bool(int, const GridFunction&)>& observe);

// Linear-in-time interpolation between stored levels spaced dt apart:
// (1 - theta) u_n + theta u_{n+1}, n = floor(t/dt), n = N-1, theta = 1 at t = T.
GridFunction time_interpolate(std::span<const GridFunction> levels, double dt, double t);
GridFunction time_interpolate(const FdTrajectory& traj, double t);

// Solution at the requested times without keeping the whole trajectory.
std::vector<GridFunction> fd_snapshots(const InitialDatum& g, const FdParams& params, std::span<const double> times);

FdStepDiagnostics diagnose(int step, const GridFunction& u);

// "step,max_slope,semiconcavity,sup_norm" plus a comment naming the shift set.
void write_diagnostics_csv(std::ostream& os, std::span<const FdStepDiagnostics> diagnostics);

}  // namespace hjt
