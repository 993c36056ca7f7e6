#pragma once

#include <memory>
#include <string>
#include <vector>

#include "hjtorus/point.hpp"

namespace hjt {

enum class GrowthTag { quadratic, smoothed_norm };

// Convex, coercive C^2 Hamiltonian p -> H0(p) together with its Legendre
// transform L(alpha) = sup_p { p.alpha - H0(p) }.
class Hamiltonian {
 public:
  virtual ~Hamiltonian() = default;

  virtual double eval(const Point& p) const = 0;
  virtual Point grad(const Point& p) const = 0;
  // Throws DomainError where L is +infinity.
  virtual double legendre(const Point& alpha) const = 0;
  virtual Point legendre_grad(const Point& alpha) const = 0;
  virtual GrowthTag growth_tag() const = 0;

  // L is finite exactly on the open ball of this radius (infinity if
  // everywhere finite).
  virtual double legendre_domain_radius() const = 0;

  // Canonical "name(param=value,...)" string; stable across runs.
  virtual std::string describe() const = 0;

  // min_alpha L(alpha) = -H0(0)
  double legendre_min() const;
};

using HamiltonianPtr = std::shared_ptr<const Hamiltonian>;

// H0(p) = scale |p|^2 / 2, L(alpha) = |alpha|^2 / (2 scale).
HamiltonianPtr quadratic_hamiltonian(double scale);

// H0(p) = sqrt(delta^2 + |p|^2) - delta. Sublinear growth, so L is finite only
// for |alpha| < 1; it is evaluated by numerical maximization.
HamiltonianPtr smoothed_norm_hamiltonian(double delta);

// Legendre transform of a radially symmetric H0 by 1-D maximization of
// s|alpha| - H0(s alpha/|alpha|) over s in [0, P_max]: a dense scan brackets
// the maximizer, then bisection on the derivative |alpha| - |D H0| locates it.
struct RadialLegendre {
  double value;
  double radius;  // |p*| of the maximizer p* = radius * alpha/|alpha|
};
RadialLegendre radial_legendre(const Hamiltonian& h, const Point& alpha);

// Potential V on the torus, Lipschitz with a known bound.
class Potential {
 public:
  virtual ~Potential() = default;
  virtual double eval(const Point& x) const = 0;
  virtual Point grad(const Point& x) const = 0;
  virtual double lipschitz_bound() const = 0;
  virtual double sup_norm() const = 0;
  virtual std::string describe() const = 0;
};

using PotentialPtr = std::shared_ptr<const Potential>;

// V(x) = amplitude * sum_i cos(2 pi x_i); Lipschitz bound 2 pi |amplitude| sqrt(d).
PotentialPtr cosine_potential(double amplitude, int dim);

// Initial (forward) or terminal (backward) datum g, Lipschitz and
// semiconcave: g(x+k) + g(x-k) - 2 g(x) <= semiconcavity_bound |k|^2.
class InitialDatum {
 public:
  virtual ~InitialDatum() = default;
  virtual double eval(const Point& x) const = 0;
  virtual double lipschitz_bound() const = 0;
  // +infinity when the datum is not semiconcave.
  virtual double semiconcavity_bound() const = 0;
  virtual int dim() const = 0;
  virtual std::string describe() const = 0;
};

using InitialDatumPtr = std::shared_ptr<const InitialDatum>;

// One term amplitude * cos(2 pi k.x + phase) of a trigonometric polynomial.
struct TrigTerm {
  double amplitude = 0.0;
  std::vector<int> wavevector;
  double phase = 0.0;
};

// g(x) = amplitude * sum_i cos(2 pi frequency x_i)
InitialDatumPtr cosine_datum(double amplitude, int frequency, int dim);
InitialDatumPtr trig_polynomial_datum(std::vector<TrigTerm> terms, int dim);
InitialDatumPtr constant_datum(double value, int dim);
// g(x) = height * sum_i (1/2 - |x_i - 1/2|): peak kink at 1/2 and a convex
// kink at 0, hence Lipschitz but not semiconcave.
InitialDatumPtr tent_datum(double height, int dim);
// g(x) + c
InitialDatumPtr shifted_datum(InitialDatumPtr base, double c);

}  // namespace hjt
