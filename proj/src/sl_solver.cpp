#include "hjtorus/sl_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <ostream>

#include "hjtorus/parallel.hpp"

namespace hjt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGolden = 0.6180339887498949;
constexpr int kGoldenIterations = 25;
constexpr int kMaxSweeps = 12;

// Objective of the pointwise minimization at node x.
class NodeObjective {
 public:
  NodeObjective(std::span<const double> u, const TorusGrid& grid, const Hamiltonian& h, double dt, const Point& x,
                double potential)
      : u_(u), grid_(grid), h_(h), dt_(dt), x_(x), potential_(potential), rdom_(h.legendre_domain_radius()) {}

  double operator()(const Point& a) const {
    if (rdom_ < kInf && norm(a) >= rdom_) return kInf;
    Point foot(x_.dim());
    for (int i = 0; i < x_.dim(); ++i) {
      const double y = x_[i] - dt_ * a[i];
      const double r = y - std::floor(y);
      foot[i] = r >= 1.0 ? 0.0 : r;
    }
    return interpolate_unchecked(u_, grid_, foot) + dt_ * (h_.legendre(a) + potential_);
  }

 private:
  std::span<const double> u_;
  const TorusGrid& grid_;
  const Hamiltonian& h_;
  double dt_;
  Point x_;
  double potential_;
  double rdom_;
};

struct Candidate {
  Point alpha;
  double value = kInf;
};

bool better(const Candidate& a, const Candidate& b) {
  if (a.value < b.value) return true;
  if (a.value > b.value) return false;
  return lex_less(a.alpha, b.alpha);
}

// Golden-section search along one axis of `start` over [lo, hi]. Returns the
// best point actually evaluated.
Candidate golden_axis(const NodeObjective& f, Candidate start, int axis, double lo, double hi) {
  Candidate best = start;
  Point probe = start.alpha;
  auto eval = [&](double t) {
    probe[axis] = t;
    const double v = f(probe);
    if (v < best.value) best = {probe, v};
    return v;
  };
  double a = lo;
  double b = hi;
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  for (int it = 0; it < kGoldenIterations; ++it) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kGolden * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kGolden * (b - a);
      fd = eval(d);
    }
  }
  eval(0.5 * (a + b));
  return best;
}

Candidate polish(const NodeObjective& f, Candidate start, double step, double box) {
  const int d = start.alpha.dim();
  if (d == 1) {
    return golden_axis(f, start, 0, std::max(-box, start.alpha[0] - step), std::min(box, start.alpha[0] + step));
  }
  // Coordinate sweeps over a fixed window until a sweep stops paying off.
  Candidate best = start;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    const double before = best.value;
    for (int a = 0; a < d; ++a) {
      best = golden_axis(f, best, a, std::max(-box, best.alpha[a] - step), std::min(box, best.alpha[a] + step));
    }
    if (before - best.value <= 1e-15 * (1.0 + std::abs(best.value))) break;
  }
  return best;
}

Point lattice_point(std::size_t flat, int dim, int samples, double box) {
  Point a(dim);
  for (int ax = dim - 1; ax >= 0; --ax) {
    const auto j = static_cast<int>(flat % static_cast<std::size_t>(samples));
    flat /= static_cast<std::size_t>(samples);
    a[ax] = -box + 2.0 * box * j / (samples - 1);
  }
  return a;
}

// True when scan[j] is <= every axis neighbour on the control lattice.
bool lattice_local_min(const std::vector<double>& scan, std::size_t j, int dim, int samples) {
  std::size_t stride = 1;
  for (int a = dim - 1; a >= 0; --a) {
    const auto pos = (j / stride) % static_cast<std::size_t>(samples);
    if (pos > 0 && scan[j] > scan[j - stride]) return false;
    if (pos + 1 < static_cast<std::size_t>(samples) && scan[j] > scan[j + stride]) return false;
    stride *= static_cast<std::size_t>(samples);
  }
  return true;
}

// |D u(y)| by central differencing of the interpolant, minus target.
double foot_residual(const GridFunction& u, const Point& foot, const Point& target) {
  const auto& g = u.grid();
  const double h = g.spacing();
  Point diff(g.dim());
  for (int a = 0; a < g.dim(); ++a) {
    Point plus = foot;
    Point minus = foot;
    plus[a] += h;
    minus[a] -= h;
    const double up = interpolate_unchecked(u.values(), g, periodize(plus));
    const double um = interpolate_unchecked(u.values(), g, periodize(minus));
    diff[a] = (up - um) / (2.0 * h) - target[a];
  }
  return norm(diff);
}

Point node_central_gradient(const GridFunction& u, std::size_t k) {
  const auto& g = u.grid();
  Point grad(g.dim());
  for (int a = 0; a < g.dim(); ++a) {
    grad[a] = (u[g.shifted(k, a, 1)] - u[g.shifted(k, a, -1)]) / (2.0 * g.spacing());
  }
  return grad;
}

}  // namespace

SlParams make_sl_params(const TorusGrid& grid, HamiltonianPtr h, PotentialPtr v, double final_time, int n_steps,
                        double control_box, int control_samples, bool polish, bool enforce_box) {
  if (!h || !v) throw ParameterError("make_sl_params: missing Hamiltonian or potential");
  if (!(final_time >= 0.0) || !std::isfinite(final_time)) throw ParameterError("make_sl_params: T must be >= 0");
  if (n_steps < 0) throw ParameterError("make_sl_params: N must be >= 0");
  if (n_steps == 0 && final_time != 0.0) throw ParameterError("make_sl_params: N = 0 requires T = 0");
  if (!(control_box > 0.0) || !std::isfinite(control_box)) throw ParameterError("make_sl_params: A must be > 0");
  if (control_samples < 3) throw ParameterError("make_sl_params: control_samples must be >= 3");
  double lattice = 1.0;
  for (int a = 0; a < grid.dim(); ++a) lattice *= control_samples;
  if (lattice > 1e7) throw ParameterError("make_sl_params: control lattice too large");
  const double dt = n_steps == 0 ? 0.0 : final_time / n_steps;
  return SlParams{grid, dt, n_steps, std::move(h), std::move(v), control_box, control_samples, polish, enforce_box};
}

double default_control_box(const Hamiltonian& h, const InitialDatum& g, const Potential& v, double final_time,
                           int dim) {
  const double r = g.lipschitz_bound() + final_time * v.lipschitz_bound();
  double m = norm(h.grad(Point(dim)));
  if (r > 0.0) {
    constexpr int kPerAxis = 33;
    std::size_t total = 1;
    for (int a = 0; a < dim; ++a) total *= kPerAxis;
    for (std::size_t k = 0; k < total; ++k) {
      const Point p = lattice_point(k, dim, kPerAxis, r);
      if (norm(p) <= r * (1.0 + 1e-12)) m = std::max(m, norm(h.grad(p)));
    }
    // Radial extremes are not on the lattice for d >= 2.
    for (int a = 0; a < dim; ++a) m = std::max(m, norm(h.grad(r * unit(dim, a))));
  }
  return 2.0 * (1.0 + m);
}

SlStepResult sl_step(const GridFunction& u_next, const SlParams& params, int n) {
  const auto& g = u_next.grid();
  if (!(g == params.grid)) throw ParameterError("sl_step: grid mismatch");
  const int d = g.dim();
  const int m = params.control_samples;
  const double box = params.control_box;
  const double step = params.lattice_step();
  std::size_t lattice_size = 1;
  for (int a = 0; a < d; ++a) lattice_size *= static_cast<std::size_t>(m);
  std::vector<Point> lattice(lattice_size);
  for (std::size_t j = 0; j < lattice_size; ++j) lattice[j] = lattice_point(j, d, m, box);

  const Hamiltonian& h = *params.hamiltonian;
  const Potential& pot = *params.potential;
  const double rdom = h.legendre_domain_radius();

  std::vector<double> values(g.size());
  ControlField field{g, std::vector<Point>(g.size()), std::vector<double>(g.size()), std::vector<double>(g.size())};
  std::vector<char> boundary_hit(g.size(), 0);

  parallel_for(g.size(), [&](std::size_t k) {
    const Point x = g.node(k);
    const NodeObjective f(u_next.values(), g, h, params.dt, x, pot.eval(x));

    std::vector<double> scan(lattice_size);
    std::size_t best_j = 0;
    for (std::size_t j = 0; j < lattice_size; ++j) {
      scan[j] = f(lattice[j]);
      if (scan[j] < scan[best_j]) best_j = j;
    }
    Candidate best{lattice[best_j], scan[best_j]};

    if (params.polish) {
      std::vector<Candidate> starts{best};
      // Second-best lattice local minimum: guards against picking the wrong basin near kinks.
      std::size_t second = lattice_size;
      for (std::size_t j = 0; j < lattice_size; ++j) {
        if (j == best_j || !std::isfinite(scan[j])) continue;
        if (second != lattice_size && !(scan[j] < scan[second])) continue;
        if (lattice_local_min(scan, j, d, m)) second = j;
      }
      if (second != lattice_size) starts.push_back({lattice[second], scan[second]});
      Point warm = h.grad(node_central_gradient(u_next, k));
      bool warm_ok = norm_inf(warm) < box && (rdom == kInf || norm(warm) < rdom);
      if (warm_ok) {
        const Candidate w{warm, f(warm)};
        if (better(w, best)) starts.push_back(w);
      }
      for (const Candidate& s : starts) {
        const Candidate c = polish(f, s, step, box);
        if (better(c, best)) best = c;
      }
    }

    if (params.enforce_box) {
      for (int a = 0; a < d; ++a) {
        if (std::abs(best.alpha[a]) >= box - 1e-3 * step) boundary_hit[k] = 1;
      }
    }
    values[k] = best.value;
    field.alpha[k] = best.alpha;
    field.value[k] = best.value;
    Point foot = x - params.dt * best.alpha;
    field.residual[k] = foot_residual(u_next, periodize(foot), h.legendre_grad(best.alpha));
  });

  for (std::size_t k = 0; k < g.size(); ++k) {
    if (boundary_hit[k]) {
      throw ControlBoxError("level " + std::to_string(n) + ", node " + std::to_string(k) +
                            ": optimal control on the boundary of the control box A = " + format_double(box) +
                            " (alpha = " + format_double(field.alpha[k][0]) + ")");
    }
  }
  return {GridFunction(g, std::move(values)), std::move(field)};
}

SlSolution sl_solve(const InitialDatum& g, const SlParams& params) {
  if (g.dim() != params.grid.dim()) throw ParameterError("sl_solve: datum dimension does not match the grid");
  const auto n_levels = static_cast<std::size_t>(params.n_steps) + 1;
  std::vector<std::optional<GridFunction>> levels(n_levels);
  std::vector<std::optional<ControlField>> controls(n_levels - 1);
  levels.back() = GridFunction::sample(params.grid, [&](const Point& x) { return g.eval(x); });
  for (int n = params.n_steps - 1; n >= 0; --n) {
    try {
      SlStepResult r = sl_step(*levels[static_cast<std::size_t>(n) + 1], params, n);
      levels[static_cast<std::size_t>(n)] = std::move(r.value);
      controls[static_cast<std::size_t>(n)] = std::move(r.controls);
    } catch (const InvariantViolation& e) {
      throw SlSolveError(e.what(), n);
    }
  }
  SlSolution sol{params, {}, {}};
  for (auto& l : levels) sol.levels.push_back(std::move(*l));
  for (auto& c : controls) sol.controls.push_back(std::move(*c));
  return sol;
}

void sl_march(const GridFunction& terminal, const SlParams& params,
              const std::function<void(int, const GridFunction&)>& observe) {
  GridFunction u = terminal;
  observe(params.n_steps, u);
  for (int n = params.n_steps - 1; n >= 0; --n) {
    try {
      u = sl_step(u, params, n).value;
    } catch (const InvariantViolation& e) {
      throw SlSolveError(e.what(), n);
    }
    observe(n, u);
  }
}

OptimalityResiduals optimality_residual(const SlSolution& solution, int n) {
  const int n_steps = solution.params.n_steps;
  if (n < 0 || n >= n_steps) throw ParameterError("optimality_residual: level out of range");
  const auto idx = static_cast<std::size_t>(n);
  const GridFunction& un = solution.levels[idx];
  const GridFunction& next = solution.levels[idx + 1];
  const ControlField& field = solution.controls[idx];
  const auto& g = un.grid();
  const Hamiltonian& h = *solution.params.hamiltonian;
  const Potential& pot = *solution.params.potential;
  const double dt = solution.params.dt;
  std::vector<double> foot(g.size());
  std::vector<double> grad(g.size());
  for (std::size_t k = 0; k < g.size(); ++k) {
    const Point x = g.node(k);
    const Point dl = h.legendre_grad(field.alpha[k]);
    foot[k] = foot_residual(next, periodize(x - dt * field.alpha[k]), dl);
    grad[k] = norm(node_central_gradient(un, k) - dl - dt * pot.grad(x));
  }
  return {GridFunction(g, std::move(foot)), GridFunction(g, std::move(grad))};
}

void write_control_csv(std::ostream& os, const ControlField& field) {
  const auto& g = field.grid;
  os << "# d=" << g.dim() << " I=" << g.nodes_per_axis() << '\n';
  for (std::size_t k = 0; k < g.size(); ++k) {
    const MultiIndex m = g.multi(k);
    for (int a = 0; a < m.dim; ++a) os << m[a] << ',';
    for (double c : field.alpha[k]) os << format_double(c) << ',';
    os << format_double(field.value[k]) << ',';
    os << (k < field.residual.size() ? format_double(field.residual[k]) : std::string("nan")) << '\n';
  }
}

}  // namespace hjt
