#include "hjtorus/numerical_hamiltonian.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

#include "hjtorus/error.hpp"
#include "hjtorus/torus_grid.hpp"

namespace hjt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

class LaxFriedrichs final : public NumericalHamiltonian {
 public:
  LaxFriedrichs(HamiltonianPtr h, double alpha) : NumericalHamiltonian(std::move(h)), alpha_(alpha) {}

  double eval(const Point& p, const Point& q) const override {
    double lin = 0.0;
    for (int i = 0; i < p.dim(); ++i) lin += p[i] + q[i];
    return base()->eval(0.5 * (q - p)) + alpha_ * lin;
  }
  Point partial_p(const Point& p, const Point& q) const override {
    Point g = base()->grad(0.5 * (q - p));
    for (double& c : g) c = -0.5 * c + alpha_;
    return g;
  }
  Point partial_q(const Point& p, const Point& q) const override {
    Point g = base()->grad(0.5 * (q - p));
    for (double& c : g) c = 0.5 * c + alpha_;
    return g;
  }
  FluxKind kind() const override { return FluxKind::lax_friedrichs; }
  double dissipation() const override { return alpha_; }
  std::string describe() const override {
    return "lax_friedrichs(alpha=" + format_double(alpha_) + "," + base()->describe() + ")";
  }

 private:
  double alpha_;
};

class Separable1d final : public NumericalHamiltonian {
 public:
  explicit Separable1d(HamiltonianPtr h) : NumericalHamiltonian(std::move(h)) {}

  double eval(const Point& p, const Point& q) const override {
    check(p, q);
    return (p[0] > 0.0 ? h({-p[0]}) : 0.0) + (q[0] > 0.0 ? h({q[0]}) : 0.0);
  }
  // The closed branch p <= 0 (resp. q <= 0) owns the kink, where the partial is 0.
  Point partial_p(const Point& p, const Point& q) const override {
    check(p, q);
    return {p[0] > 0.0 ? -base()->grad({-p[0]})[0] : 0.0};
  }
  Point partial_q(const Point& p, const Point& q) const override {
    check(p, q);
    return {q[0] > 0.0 ? base()->grad({q[0]})[0] : 0.0};
  }
  FluxKind kind() const override { return FluxKind::separable_1d; }
  std::string describe() const override { return "separable_1d(" + base()->describe() + ")"; }

 private:
  double h(const Point& x) const { return base()->eval(x); }
  static void check(const Point& p, const Point& q) {
    if (p.dim() != 1 || q.dim() != 1) throw UnsupportedDimension("separable_1d is defined for d = 1 only");
  }
};

// Calls f(point) for every node of the lattice {-R + 2R j/(m-1)}^dim.
template <class F>
void for_each_lattice_point(int dim, int per_axis, double radius, F&& f) {
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  Point x(dim);
  while (true) {
    for (int a = 0; a < dim; ++a) x[a] = -radius + 2.0 * radius * idx[a] / (per_axis - 1);
    f(x);
    int a = dim - 1;
    while (a >= 0 && ++idx[a] == per_axis) {
      idx[a] = 0;
      --a;
    }
    if (a < 0) break;
  }
}

}  // namespace

NumericalHamiltonianPtr lax_friedrichs(HamiltonianPtr h, double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw ParameterError("lax_friedrichs: alpha must be > 0, got " + format_double(alpha));
  }
  return std::make_shared<LaxFriedrichs>(std::move(h), alpha);
}

double suggest_alpha(const Hamiltonian& h, double slope_bound, int dim) {
  if (slope_bound < 0.0) throw ParameterError("suggest_alpha: R must be >= 0");
  if (slope_bound == 0.0) return 0.5 * norm_inf(h.grad(Point(dim)));
  double m = 0.0;
  for_each_lattice_point(dim, 33, slope_bound, [&](const Point& p) { m = std::max(m, norm_inf(h.grad(p))); });
  return 0.5 * m;
}

NumericalHamiltonianPtr separable_1d(HamiltonianPtr h, int dim) {
  if (dim != 1) throw UnsupportedDimension("separable_1d: d must be 1, got " + std::to_string(dim));
  const double h0 = h->eval({0.0});
  if (std::abs(h0) > 1e-14) throw PreconditionError("separable_1d: requires H0(0) = 0");
  for (int j = -1000; j <= 1000; ++j) {
    if (h->eval({j * 0.01}) < -1e-14) throw PreconditionError("separable_1d: requires min H0 = H0(0)");
  }
  return std::make_shared<Separable1d>(std::move(h));
}

CflBound cfl_bound(const NumericalHamiltonian& f, double slope_bound, double h, int dim) {
  if (!(slope_bound > 0.0)) throw ParameterError("cfl_bound: R must be > 0");
  if (!(h > 0.0)) throw ParameterError("cfl_bound: h must be > 0");
  const int per_axis = dim <= 2 ? 33 : 9;
  double m = 0.0;
  // The lattice in R^{2d} is enumerated as a lattice in dimension 2d split into (p, q).
  std::vector<int> idx(static_cast<std::size_t>(2 * dim), 0);
  Point p(dim);
  Point q(dim);
  while (true) {
    for (int a = 0; a < dim; ++a) {
      p[a] = -slope_bound + 2.0 * slope_bound * idx[a] / (per_axis - 1);
      q[a] = -slope_bound + 2.0 * slope_bound * idx[dim + a] / (per_axis - 1);
    }
    double s = 0.0;
    const Point fp = f.partial_p(p, q);
    const Point fq = f.partial_q(p, q);
    for (int a = 0; a < dim; ++a) s += fp[a] + fq[a];
    m = std::max(m, s);
    int a = 2 * dim - 1;
    while (a >= 0 && ++idx[a] == per_axis) {
      idx[a] = 0;
      --a;
    }
    if (a < 0) break;
  }
  return {slope_bound, m, m > 0.0 ? h / m : kInf};
}

MonotoneReport verify_monotone_update(const NumericalHamiltonian& f, double slope_bound, double h, double dt,
                                      int trials, int dim, std::mt19937_64& rng, bool enforce_cfl) {
  if (enforce_cfl) {
    const CflBound cfl = cfl_bound(f, slope_bound, h, dim);
    if (dt > cfl.dt_max * (1.0 + 1e-12)) {
      throw PreconditionError("verify_monotone_update: dt = " + format_double(dt) + " exceeds dt_max = " +
                              format_double(cfl.dt_max));
    }
  }
  MonotoneReport rep;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> slope(-slope_bound, slope_bound);

  // Stencil storage: centre, then v(x + h e_i) and v(x - h e_i) per axis.
  struct Stencil {
    double centre;
    std::array<double, kMaxDim> plus;
    std::array<double, kMaxDim> minus;
  };
  auto update = [&](const Stencil& s) {
    Point p(dim);
    Point q(dim);
    for (int a = 0; a < dim; ++a) {
      p[a] = -(s.plus[a] - s.centre) / h;
      q[a] = (s.centre - s.minus[a]) / h;
    }
    return s.centre - dt * f.eval(p, q);
  };

  for (int t = 0; t < trials; ++t) {
    Stencil s{};
    s.centre = 2.0 * unit(rng) - 1.0;
    for (int a = 0; a < dim; ++a) {
      s.plus[a] = s.centre + h * slope(rng);
      s.minus[a] = s.centre - h * slope(rng);
    }
    // Which value to raise: 0 = centre, 1..d = plus neighbours, d+1..2d = minus neighbours.
    const int which = static_cast<int>(unit(rng) * (2 * dim + 1)) % (2 * dim + 1);
    double room = kInf;
    if (which == 0) {
      for (int a = 0; a < dim; ++a) {
        room = std::min(room, s.plus[a] - s.centre + slope_bound * h);  // forward slope may fall to -R
        room = std::min(room, slope_bound * h - (s.centre - s.minus[a]));  // backward slope may rise to R
      }
    } else if (which <= dim) {
      const int a = which - 1;
      room = slope_bound * h - (s.plus[a] - s.centre);
    } else {
      const int a = which - dim - 1;
      room = s.centre - s.minus[a] + slope_bound * h;
    }
    room = std::max(room, 0.0);
    const double bump = room * (1.0 - unit(rng));  // in (0, room]
    if (bump <= 0.0) {
      ++rep.trials;
      continue;
    }
    const double before = update(s);
    Stencil r = s;
    if (which == 0) {
      r.centre += bump;
    } else if (which <= dim) {
      r.plus[which - 1] += bump;
    } else {
      r.minus[which - dim - 1] += bump;
    }
    const double after = update(r);
    const double drop = before - after;
    if (drop > rep.max_violation) rep.max_violation = drop;
    if (drop > 1e-12) ++rep.violations;
    ++rep.trials;
  }
  return rep;
}

}  // namespace hjt
