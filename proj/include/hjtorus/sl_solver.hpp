#pragma once

#include <functional>
#include <iosfwd>
#include <vector>

#include "hjtorus/hamiltonian.hpp"
#include "hjtorus/torus_grid.hpp"

namespace hjt {

// Fully discrete semi-Lagrangian scheme for the backward problem with
// H(x, p) = H0(p) - V(x):
//   u_n(x_i) = min_alpha { I[u_{n+1}](x_i - dt alpha) + dt (L(alpha) + V(x_i)) },
//   u_N = g on the grid.
struct SlParams {
  TorusGrid grid;
  double dt;
  int n_steps;
  HamiltonianPtr hamiltonian;
  PotentialPtr potential;
  double control_box;  // A: controls are searched in [-A, A]^d
  int control_samples;  // lattice points per axis, including both ends
  bool polish = true;  // local refinement after the lattice scan
  bool enforce_box = true;  // boundary minimizers raise ControlBoxError

  double final_time() const { return dt * n_steps; }
  double lattice_step() const { return 2.0 * control_box / (control_samples - 1); }
};

SlParams make_sl_params(const TorusGrid& grid, HamiltonianPtr h, PotentialPtr v, double final_time, int n_steps,
                        double control_box, int control_samples, bool polish = true, bool enforce_box = true);

// 2 (1 + max |D_p H0(p)| over sampled |p| <= Lip(g) + T Lip(V)).
double default_control_box(const Hamiltonian& h, const InitialDatum& g, const Potential& v, double final_time,
                           int dim);

// Per-node optimal control at one level.
struct ControlField {
  TorusGrid grid;
  std::vector<Point> alpha;
  std::vector<double> value;  // attained minimum; equals the value table entry
  std::vector<double> residual;  // |D u_{n+1}(foot) - D_alpha L(alpha)|
};

struct SlStepResult {
  GridFunction value;
  ControlField controls;
};

// One backward step from u_{n+1}. Minimization: scan of the
// control_samples^d lattice over [-A, A]^d (ties to the lexicographically
// smallest control), then, when polish is on, golden-section (d = 1) or
// coordinate-descent (d >= 2) refinement around the best lattice minima and an
// analytic warm start alpha = D_p H0(central slope).
SlStepResult sl_step(const GridFunction& u_next, const SlParams& params, int n);

struct SlSolution {
  SlParams params;
  std::vector<GridFunction> levels;  // levels[n] = u_n, n = 0..N
  std::vector<ControlField> controls;  // controls[n] for n = 0..N-1
};

class SlSolveError : public InvariantViolation {
 public:
  SlSolveError(const std::string& what, int level) : InvariantViolation(what), level_(level) {}
  int level() const { return level_; }

 private:
  int level_;
};

SlSolution sl_solve(const InitialDatum& g, const SlParams& params);

// Backward sweep calling observe(n, u_n) for n = N, N-1, ..., 0 without
// storing levels or controls.
void sl_march(const GridFunction& terminal, const SlParams& params,
              const std::function<void(int, const GridFunction&)>& observe);

struct OptimalityResiduals {
  // |D u_{n+1}(x_i - dt alpha*) - D_alpha L(alpha*)|, gradient by central
  // differencing of the interpolant at the foot.
  GridFunction foot;
  // |D u_n(x_i) - D_alpha L(alpha*) - dt D V(x_i)|, central differences at the node.
  GridFunction gradient;
};

// Residuals of the first-order optimality conditions at level n (0 <= n < N).
// Reported, not asserted: they are O(1) next to kinks.
OptimalityResiduals optimality_residual(const SlSolution& solution, int n);

// "i_1,...,i_d,alpha_1,...,alpha_d,value,residual"
void write_control_csv(std::ostream& os, const ControlField& field);

}  // namespace hjt
