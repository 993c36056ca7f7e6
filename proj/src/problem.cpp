#include "hjtorus/problem.hpp"

#include <cmath>

#include "hjtorus/analysis.hpp"

namespace hjt {

std::string Problem::describe() const {
  return "dim=" + std::to_string(dim) + ";T=" + format_double(final_time) + ";H=" + hamiltonian->describe() +
         ";V=" + potential->describe() + ";g=" + datum->describe();
}

namespace {

double resolve_fd_dt(const Coupling& coupling, const Level& level, double h, double dt_max) {
  switch (coupling.rule) {
    case CouplingRule::cfl:
      return coupling.c * dt_max;
    case CouplingRule::dt_linear:
      return coupling.c * h;
    case CouplingRule::dt_sqrt:
      return coupling.c * std::sqrt(h);
    case CouplingRule::explicit_list:
      return level.dt;
    case CouplingRule::h_quadratic:
      break;
  }
  if (level.dt > 0.0) return level.dt;
  return std::sqrt(h / coupling.c);
}

}  // namespace

int align_steps(int n, std::span<const double> fractions) {
  if (fractions.empty() || n == 0) return n;
  for (int m = n; m <= 4 * n + 1000; ++m) {
    bool ok = true;
    for (double f : fractions) {
      const double x = f * m;
      if (std::abs(x - std::round(x)) > 1e-9 * std::max(1.0, x)) {
        ok = false;
        break;
      }
    }
    if (ok) return m;
  }
  throw ParameterError("no step count near " + std::to_string(n) + " puts every snapshot on a time level");
}

FdParams build_fd_level(const Problem& problem, const FdSettings& settings, const Coupling& coupling,
                        const Level& level) {
  const TorusGrid grid(problem.dim, level.nodes);
  const GridFunction g0 = GridFunction::sample(grid, [&](const Point& x) { return problem.datum->eval(x); });
  double slope = lipschitz_estimate(g0) * settings.slope_inflation;
  if (slope == 0.0) slope = 1.0;  // constant data: any positive budget works

  NumericalHamiltonianPtr flux;
  if (settings.flux == FluxKind::lax_friedrichs) {
    double alpha = settings.alpha.value_or(suggest_alpha(*problem.hamiltonian, slope, problem.dim) *
                                           settings.alpha_inflation);
    if (alpha <= 0.0) alpha = settings.alpha_inflation * 1e-3;
    flux = lax_friedrichs(problem.hamiltonian, alpha);
  } else {
    flux = separable_1d(problem.hamiltonian, problem.dim);
  }
  const CflBound cfl = cfl_bound(*flux, slope, grid.spacing(), problem.dim);
  const double dt_target = resolve_fd_dt(coupling, level, grid.spacing(), cfl.dt_max);
  if (!(dt_target > 0.0) || !std::isfinite(dt_target)) {
    throw ParameterError("level I = " + std::to_string(level.nodes) + ": could not resolve a positive time step");
  }
  const int n_steps = align_steps(steps_for(problem.final_time, dt_target), level.align_fractions);
  return make_fd_params(grid, flux, slope, problem.final_time, n_steps, settings.enforce_cfl);
}

int sl_nodes_for(const Coupling& coupling, double dt) {
  return static_cast<int>(std::lround(1.0 / (coupling.c * dt * dt)));
}

SlParams build_sl_level(const Problem& problem, const SlSettings& settings, const Coupling& coupling,
                        const Level& level) {
  int nodes = level.nodes;
  double dt_target = level.dt;
  switch (coupling.rule) {
    case CouplingRule::h_quadratic:
      if (dt_target > 0.0) {
        nodes = sl_nodes_for(coupling, dt_target);
      } else {
        dt_target = std::sqrt(1.0 / (nodes * coupling.c));
      }
      break;
    case CouplingRule::dt_linear:
      dt_target = coupling.c / nodes;
      break;
    case CouplingRule::dt_sqrt:
      dt_target = coupling.c * std::sqrt(1.0 / nodes);
      break;
    case CouplingRule::explicit_list:
      break;
    case CouplingRule::cfl:
      throw ParameterError("the cfl coupling applies to the finite-difference scheme only");
  }
  if (!(dt_target > 0.0) || nodes < 2) throw ParameterError("SL level: need a positive dt and I >= 2");
  const TorusGrid grid(problem.dim, nodes);
  const int n_steps = align_steps(steps_for(problem.final_time, dt_target), level.align_fractions);
  const double box = settings.control_box.value_or(
      default_control_box(*problem.hamiltonian, *problem.datum, *problem.potential, problem.final_time, problem.dim));
  return make_sl_params(grid, problem.hamiltonian, problem.potential, problem.final_time, n_steps, box,
                        settings.control_samples, settings.polish);
}

const char* to_string(SchemeKind k) { return k == SchemeKind::fd ? "fd" : "sl"; }

const char* to_string(CouplingRule r) {
  switch (r) {
    case CouplingRule::cfl:
      return "cfl";
    case CouplingRule::dt_linear:
      return "dt_linear";
    case CouplingRule::dt_sqrt:
      return "dt_sqrt";
    case CouplingRule::h_quadratic:
      return "h_quadratic";
    case CouplingRule::explicit_list:
      return "explicit";
  }
  return "?";
}

const char* to_string(FluxKind k) { return k == FluxKind::lax_friedrichs ? "lax_friedrichs" : "separable_1d"; }

}  // namespace hjt
