#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hjtorus/hamiltonian.hpp"
#include "hjtorus/problem.hpp"
#include "hjtorus/torus_grid.hpp"

namespace hjt {

enum class Direction { forward, backward };

// Exact solution for V = 0:
//   u(x, t) = min_y { g(y) + tau L((x - y) / tau) },
// tau = t (forward) or T - t (backward).
struct HopfLaxProblem {
  InitialDatumPtr datum;
  HamiltonianPtr hamiltonian;
  Direction direction = Direction::forward;
  double final_time = 0.0;  // used by the backward form only
  int dim = 1;
  // Scan density per unit length along each axis. The default is lowered to
  // 512 in dimension 2 and 64 beyond.
  std::optional<int> samples_per_unit;
};

// Dense scan of y over the box |y_i - x_i| <= tau G (G = max |D H0| over
// |p| <= Lip(g), capped by the Legendre domain) followed by golden-section
// refinement around the two best scan minima. Ties go to the smallest y.
double hopf_lax_eval(const HopfLaxProblem& prob, const Point& x, double t);
GridFunction hopf_lax_grid(const HopfLaxProblem& prob, const TorusGrid& grid, double t);

// Radius of the scan window at elapsed time tau.
double hopf_lax_window(const HopfLaxProblem& prob, double tau);

struct Provenance {
  std::string method;  // "hopf_lax", "sl_reference" or "fd_reference"
  int nodes = 0;
  double dt = 0.0;
  int n_steps = 0;
  int multiplier = 0;
  // max over snapshots of the sup-norm gap between the two internal levels
  // (multiplier / 2 and multiplier); 0 for closed-form oracles.
  double estimated_accuracy = 0.0;
  std::string description;
  bool cache_hit = false;
};

struct ReferenceRequest {
  Problem problem;
  SchemeKind scheme = SchemeKind::sl;
  FdSettings fd;
  SlSettings sl;
  Coupling coupling;
  int finest_nodes = 0;  // finest grid under test
  int multiplier = 8;
  std::vector<double> fractions;  // snapshot times as fractions of elapsed time
  std::optional<double> dt;  // overrides the coupled reference step
  std::string cache_dir;  // empty: no caching
};

struct ReferenceSolution {
  std::vector<double> fractions;
  std::vector<GridFunction> snapshots;  // one per fraction
  Provenance provenance;
};

// Solves at multiplier * finest_nodes with the request's own coupling
// (SL for backward problems, FD for forward ones).
ReferenceSolution reference_solve(const ReferenceRequest& request);

// Canonical text the cache key is derived from.
std::string reference_description(const ReferenceRequest& request);
// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string& text);

// Exhaustive minimum of
//   sum_k dt (L(alpha_k) + V(X_k)) + I[g](X_N),  X_{k+1} = X_k - dt alpha_k,
// over all control sequences on `lattice`, for every node and every level.
// levels[n] holds the value with N - n stages left. Requires
// |lattice|^N <= 1e7.
std::vector<GridFunction> brute_force_dp(const GridFunction& terminal, const std::vector<Point>& lattice, int n_steps,
                                         double dt, const Hamiltonian& h, const Potential& v);

const char* to_string(Direction d);

}  // namespace hjt
