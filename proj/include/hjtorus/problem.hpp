#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hjtorus/fd_solver.hpp"
#include "hjtorus/hamiltonian.hpp"
#include "hjtorus/sl_solver.hpp"

namespace hjt {

// Forward problem  u_t + H0(Du) = 0, u(., 0) = g   (FD scheme), or
// backward problem -u_t + H0(Du) - V = 0, u(., T) = g (SL scheme).
struct Problem {
  int dim = 1;
  double final_time = 0.5;
  HamiltonianPtr hamiltonian;
  PotentialPtr potential;
  InitialDatumPtr datum;

  std::string describe() const;
};

enum class SchemeKind { fd, sl };

// How the time step follows the grid across refinement levels.
enum class CouplingRule {
  cfl,  // dt = c * dt_max(h)
  dt_linear,  // dt = c * h
  dt_sqrt,  // dt = c * sqrt(h)
  h_quadratic,  // h = c * dt^2 (levels given by dt)
  explicit_list,  // (I, dt) pairs given directly
};

struct Coupling {
  CouplingRule rule = CouplingRule::cfl;
  double c = 0.9;
};

struct FdSettings {
  FluxKind flux = FluxKind::lax_friedrichs;
  std::optional<double> alpha;  // nullopt: suggest_alpha * alpha_inflation
  double alpha_inflation = 1.1;
  double slope_inflation = 1.05;  // R = measured Lip of g on the grid * this
  bool enforce_cfl = true;
};

struct SlSettings {
  std::optional<double> control_box;  // nullopt: default_control_box()
  int control_samples = 201;
  bool polish = true;
};

// One refinement level: grid size and (possibly unresolved) time step.
struct Level {
  int nodes = 0;
  double dt = 0.0;  // target dt; 0 means "derive from the coupling"
  // When non-empty, N is raised until every f * N is an integer, so the
  // snapshot times f * T fall on time levels.
  std::vector<double> align_fractions;
};

// Smallest N' >= n with f * N' integral for every f (up to 1e-9), searched up
// to 4 n + 1000; ParameterError if none exists.
int align_steps(int n, std::span<const double> fractions);

// Resolves dt (or I for h = c dt^2) and builds validated scheme parameters.
// The step is shortened so that N dt = T exactly.
FdParams build_fd_level(const Problem& problem, const FdSettings& settings, const Coupling& coupling,
                        const Level& level);
SlParams build_sl_level(const Problem& problem, const SlSettings& settings, const Coupling& coupling,
                        const Level& level);

// Grid size for an SL level under h = c dt^2 (rounded to the nearest integer).
int sl_nodes_for(const Coupling& coupling, double dt);

const char* to_string(SchemeKind k);
const char* to_string(CouplingRule r);
const char* to_string(FluxKind k);

}  // namespace hjt
