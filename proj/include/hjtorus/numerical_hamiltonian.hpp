#pragma once

#include <cstdint>
#include <limits>
#include <memory>
#include <random>
#include <string>

#include "hjtorus/hamiltonian.hpp"

namespace hjt {

enum class FluxKind { lax_friedrichs, separable_1d };

// Two-slot numerical Hamiltonian F(p, q) consuming p = -delta_h u and
// q = delta_{-h} u. Consistent (F(-p, p) = H0(p)) and componentwise
// nondecreasing on the slope box it is used on.
class NumericalHamiltonian {
 public:
  explicit NumericalHamiltonian(HamiltonianPtr base) : base_(std::move(base)) {}
  virtual ~NumericalHamiltonian() = default;

  virtual double eval(const Point& p, const Point& q) const = 0;
  virtual Point partial_p(const Point& p, const Point& q) const = 0;
  virtual Point partial_q(const Point& p, const Point& q) const = 0;
  virtual FluxKind kind() const = 0;
  // Linear dissipation coefficient (Lax-Friedrichs); 0 otherwise.
  virtual double dissipation() const { return 0.0; }
  virtual std::string describe() const = 0;

  const HamiltonianPtr& base() const { return base_; }

 private:
  HamiltonianPtr base_;
};

using NumericalHamiltonianPtr = std::shared_ptr<const NumericalHamiltonian>;

// F(p, q) = H0((q - p)/2) + alpha * sum_i (p_i + q_i)
NumericalHamiltonianPtr lax_friedrichs(HamiltonianPtr h, double alpha);

// Smallest alpha making both Lax-Friedrichs partials nonnegative on the box
// |p|_inf <= R: half the sampled max of |H0_{p_i}| over a 33^d lattice.
double suggest_alpha(const Hamiltonian& h, double slope_bound, int dim);

// F(p, q) = F1(p) + F2(q), F1(p) = H0(-p) 1_{p>0}, F2(q) = H0(q) 1_{q>0}.
// d = 1 only; requires H0(0) = 0 = min H0.
NumericalHamiltonianPtr separable_1d(HamiltonianPtr h, int dim = 1);

struct CflBound {
  double slope_bound;  // R
  double max_partial_sum;  // M_F(R)
  double dt_max;  // h / M_F, +inf when M_F = 0
};

// M_F(R) = sup over the box |p|_inf, |q|_inf <= R of sum_i (F_{p_i} + F_{q_i}),
// sampled on a lattice (33 points per axis for d <= 2, 9 beyond).
CflBound cfl_bound(const NumericalHamiltonian& f, double slope_bound, double h, int dim);

struct MonotoneReport {
  int trials = 0;
  int violations = 0;  // trials whose decrease exceeded 1e-12
  double max_violation = 0.0;  // largest observed decrease of the update
};

// Randomized check that G(v) = v(x) - dt F(-delta_h v, delta_{-h} v) is
// nondecreasing in the centre value and every neighbour on stencils whose
// slopes stay within R before and after the perturbation. Throws
// PreconditionError when dt exceeds the CFL bound unless enforce_cfl is false.
MonotoneReport verify_monotone_update(const NumericalHamiltonian& f, double slope_bound, double h, double dt,
                                      int trials, int dim, std::mt19937_64& rng, bool enforce_cfl = true);

}  // namespace hjt
