#include "hjtorus/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>

#include <json.hpp>

#include "hjtorus/analysis.hpp"
#include "hjtorus/fd_solver.hpp"
#include "hjtorus/parallel.hpp"
#include "hjtorus/sl_solver.hpp"

namespace hjt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kGolden = 0.6180339887498949;
constexpr int kRefineIterations = 40;

double elapsed(const HopfLaxProblem& prob, double t) {
  if (!std::isfinite(t)) throw ParameterError("hopf_lax: non-finite time");
  const double tau = prob.direction == Direction::forward ? t : prob.final_time - t;
  if (tau < 0.0) {
    throw ParameterError("hopf_lax: elapsed time " + format_double(tau) + " is negative");
  }
  return tau;
}

int samples_per_unit(const HopfLaxProblem& prob) {
  if (prob.samples_per_unit) {
    if (*prob.samples_per_unit < 1) throw ParameterError("hopf_lax: samples_per_unit must be >= 1");
    return *prob.samples_per_unit;
  }
  return prob.dim == 1 ? 4096 : prob.dim == 2 ? 512 : 64;
}

// g(y) + tau L((x - y) / tau), +infinity outside the Legendre domain.
struct HopfLaxObjective {
  const InitialDatum& g;
  const Hamiltonian& h;
  Point x;
  double tau;
  double rdom;

  double operator()(const Point& y) const {
    const Point v = (x - y) * (1.0 / tau);
    if (rdom < kInf && norm(v) >= rdom) return kInf;
    return g.eval(periodize(y)) + tau * h.legendre(v);
  }
};

struct Best {
  Point y;
  double value = kInf;
};

void consider(Best& best, const Point& y, double value) {
  if (value < best.value || (value == best.value && lex_less(y, best.y))) best = {y, value};
}

void golden_axis(const HopfLaxObjective& f, Best& best, int axis, double lo, double hi) {
  Point probe = best.y;
  auto eval = [&](double s) {
    probe[axis] = s;
    const double v = f(probe);
    consider(best, probe, v);
    return v;
  };
  double a = lo;
  double b = hi;
  double c = b - kGolden * (b - a);
  double d = a + kGolden * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  for (int it = 0; it < kRefineIterations; ++it) {
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
}

double max_speed(const Hamiltonian& h, double slope, int dim) {
  double m = norm(h.grad(Point(dim)));
  constexpr int kSamples = 257;
  for (int s = 1; s < kSamples; ++s) {
    const double r = slope * s / (kSamples - 1);
    m = std::max(m, norm(h.grad(r * unit(dim, 0))));
  }
  return m;
}

}  // namespace

double hopf_lax_window(const HopfLaxProblem& prob, double tau) {
  if (!prob.datum || !prob.hamiltonian) throw ParameterError("hopf_lax: missing datum or Hamiltonian");
  const double lip = prob.datum->lipschitz_bound();
  if (!std::isfinite(lip)) throw PreconditionError("hopf_lax: datum must be Lipschitz");
  double speed = max_speed(*prob.hamiltonian, lip, prob.dim);
  speed = std::min(speed, prob.hamiltonian->legendre_domain_radius());
  return tau * speed * 1.02;
}

double hopf_lax_eval(const HopfLaxProblem& prob, const Point& x, double t) {
  if (x.dim() != prob.dim) throw ParameterError("hopf_lax: point dimension mismatch");
  const double tau = elapsed(prob, t);
  const InitialDatum& g = *prob.datum;
  if (tau == 0.0) return g.eval(periodize(x));
  const Hamiltonian& h = *prob.hamiltonian;
  const double window = hopf_lax_window(prob, tau);
  const HopfLaxObjective f{g, h, x, tau, h.legendre_domain_radius()};
  if (window == 0.0) return f(x);

  const int d = prob.dim;
  const int per_axis = std::max(65, static_cast<int>(std::ceil(2.0 * window * samples_per_unit(prob))) + 1);
  const double step = 2.0 * window / (per_axis - 1);
  double total = 1.0;
  for (int a = 0; a < d; ++a) total *= per_axis;
  if (total > 5e7) throw ParameterError("hopf_lax: scan of " + format_double(total) + " points is too large");

  auto scan_point = [&](std::size_t flat) {
    Point y(d);
    for (int a = d - 1; a >= 0; --a) {
      const auto j = static_cast<long>(flat % static_cast<std::size_t>(per_axis));
      flat /= static_cast<std::size_t>(per_axis);
      y[a] = x[a] - window + step * static_cast<double>(j);
    }
    return y;
  };

  Best best;
  if (d == 1) {
    // Keep the two best local minima of the scan; g may be nonconvex.
    std::vector<double> scan(static_cast<std::size_t>(per_axis));
    for (std::size_t j = 0; j < scan.size(); ++j) scan[j] = f(scan_point(j));
    std::size_t first = scan.size();
    std::size_t second = scan.size();
    for (std::size_t j = 0; j < scan.size(); ++j) {
      const bool left_ok = j == 0 || scan[j] <= scan[j - 1];
      const bool right_ok = j + 1 == scan.size() || scan[j] <= scan[j + 1];
      if (!left_ok || !right_ok || !std::isfinite(scan[j])) continue;
      if (first == scan.size() || scan[j] < scan[first]) {
        second = first;
        first = j;
      } else if (second == scan.size() || scan[j] < scan[second]) {
        second = j;
      }
    }
    for (std::size_t j : {first, second}) {
      if (j == scan.size()) continue;
      Best local{scan_point(j), scan[j]};
      golden_axis(f, local, 0, local.y[0] - step, local.y[0] + step);
      consider(best, local.y, local.value);
    }
    if (!std::isfinite(best.value)) throw InvariantViolation("hopf_lax: no finite value in the scan window");
    return best.value;
  }

  const auto count = static_cast<std::size_t>(total);
  for (std::size_t k = 0; k < count; ++k) {
    const Point y = scan_point(k);
    consider(best, y, f(y));
  }
  if (!std::isfinite(best.value)) throw InvariantViolation("hopf_lax: no finite value in the scan window");
  double width = step;
  for (int sweep = 0; sweep < 2; ++sweep) {
    for (int a = 0; a < d; ++a) golden_axis(f, best, a, best.y[a] - width, best.y[a] + width);
    width *= 0.5;
  }
  return best.value;
}

GridFunction hopf_lax_grid(const HopfLaxProblem& prob, const TorusGrid& grid, double t) {
  if (grid.dim() != prob.dim) throw ParameterError("hopf_lax: grid dimension mismatch");
  std::vector<double> out(grid.size());
  parallel_for(grid.size(), [&](std::size_t k) { out[k] = hopf_lax_eval(prob, grid.node(k), t); });
  return GridFunction(grid, std::move(out));
}

std::uint64_t fnv1a(const std::string& text) {
  std::uint64_t hash = 14695981039346656037ull;
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 1099511628211ull;
  }
  return hash;
}

std::string reference_description(const ReferenceRequest& r) {
  std::string s = r.problem.describe();
  s += ";scheme=";
  s += to_string(r.scheme);
  if (r.scheme == SchemeKind::fd) {
    s += ";flux=";
    s += to_string(r.fd.flux);
    s += ";alpha=" + (r.fd.alpha ? format_double(*r.fd.alpha) : std::string("auto"));
    s += ";alpha_inflation=" + format_double(r.fd.alpha_inflation);
    s += ";slope_inflation=" + format_double(r.fd.slope_inflation);
  } else {
    s += ";box=" + (r.sl.control_box ? format_double(*r.sl.control_box) : std::string("auto"));
    s += ";samples=" + std::to_string(r.sl.control_samples);
    s += r.sl.polish ? ";polish=1" : ";polish=0";
  }
  s += ";coupling=";
  s += to_string(r.coupling.rule);
  s += ",c=" + format_double(r.coupling.c);
  s += ";finest=" + std::to_string(r.finest_nodes);
  s += ";multiplier=" + std::to_string(r.multiplier);
  s += ";dt=" + (r.dt ? format_double(*r.dt) : std::string("coupled"));
  s += ";fractions=";
  for (double f : r.fractions) s += format_double(f) + ",";
  return s;
}

namespace {

struct LevelRun {
  std::vector<GridFunction> snapshots;
  int nodes;
  double dt;
  int n_steps;
};

// Largest N < bound that puts every fraction on a time level; 0 if none.
int aligned_below(int bound, std::span<const double> fractions) {
  for (int m = bound - 1; m >= 1; --m) {
    if (align_steps(m, fractions) == m) return m;
  }
  return 0;
}

// step_cap > 0 forces the SL level to fewer than step_cap steps, so the coarse
// internal level is coarser in time as well as in space.
LevelRun run_reference_level(const ReferenceRequest& r, int nodes, int step_cap = 0) {
  Level level{nodes, r.dt.value_or(0.0), r.fractions};
  const Problem& p = r.problem;
  if (r.scheme == SchemeKind::fd) {
    const FdParams params = build_fd_level(p, r.fd, r.coupling, level);
    std::vector<double> times;
    for (double f : r.fractions) times.push_back(f * p.final_time);
    return {fd_snapshots(*p.datum, params, times), nodes, params.dt, params.n_steps};
  }
  Coupling coupling = r.coupling;
  if (r.dt) coupling.rule = CouplingRule::explicit_list;
  if (coupling.rule == CouplingRule::h_quadratic) level.dt = 0.0;  // derive dt from the node count
  SlParams params = build_sl_level(p, r.sl, coupling, level);
  if (step_cap > 0 && params.n_steps >= step_cap) {
    if (const int m = aligned_below(step_cap, r.fractions); m > 0) {
      level.nodes = params.grid.nodes_per_axis();
      level.dt = p.final_time / m;
      params = build_sl_level(p, r.sl, Coupling{CouplingRule::explicit_list, coupling.c}, level);
    }
  }
  std::vector<int> wanted;
  for (double f : r.fractions) wanted.push_back(params.n_steps - static_cast<int>(std::lround(f * params.n_steps)));
  std::vector<std::optional<GridFunction>> found(wanted.size());
  const GridFunction terminal = GridFunction::sample(params.grid, [&](const Point& x) { return p.datum->eval(x); });
  sl_march(terminal, params, [&](int n, const GridFunction& u) {
    for (std::size_t i = 0; i < wanted.size(); ++i) {
      if (wanted[i] == n) found[i] = u;
    }
  });
  LevelRun run{{}, params.grid.nodes_per_axis(), params.dt, params.n_steps};
  for (auto& f : found) run.snapshots.push_back(std::move(*f));
  return run;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::optional<ReferenceSolution> load_cached(const std::filesystem::path& dir, const std::string& stem,
                                             const std::string& description) {
  const auto sidecar = dir / (stem + ".json");
  std::ifstream in(sidecar);
  if (!in) return std::nullopt;
  nlohmann::json j;
  try {
    in >> j;
    if (j.at("description").get<std::string>() != description) return std::nullopt;
    ReferenceSolution sol;
    sol.fractions = j.at("fractions").get<std::vector<double>>();
    for (const auto& file : j.at("snapshots")) {
      std::ifstream csv(dir / file.get<std::string>());
      if (!csv) return std::nullopt;
      sol.snapshots.push_back(read_csv(csv));
    }
    Provenance& pv = sol.provenance;
    pv.method = j.at("method").get<std::string>();
    pv.nodes = j.at("nodes").get<int>();
    pv.dt = j.at("dt").get<double>();
    pv.n_steps = j.at("n_steps").get<int>();
    pv.multiplier = j.at("multiplier").get<int>();
    pv.estimated_accuracy = j.at("estimated_accuracy").get<double>();
    pv.description = description;
    pv.cache_hit = true;
    return sol;
  } catch (const std::exception&) {
    return std::nullopt;  // stale or foreign file: recompute
  }
}

void store_cached(const std::filesystem::path& dir, const std::string& stem, const ReferenceSolution& sol) {
  std::filesystem::create_directories(dir);
  nlohmann::json j;
  const Provenance& pv = sol.provenance;
  j["description"] = pv.description;
  j["method"] = pv.method;
  j["nodes"] = pv.nodes;
  j["dt"] = pv.dt;
  j["n_steps"] = pv.n_steps;
  j["multiplier"] = pv.multiplier;
  j["estimated_accuracy"] = pv.estimated_accuracy;
  j["fractions"] = sol.fractions;
  std::vector<std::string> files;
  for (std::size_t i = 0; i < sol.snapshots.size(); ++i) {
    files.push_back(stem + "-" + std::to_string(i) + ".csv");
    std::ofstream csv(dir / files.back());
    write_csv(csv, sol.snapshots[i]);
  }
  j["snapshots"] = files;
  std::ofstream out(dir / (stem + ".json"));
  out << j.dump(2) << '\n';
}

}  // namespace

ReferenceSolution reference_solve(const ReferenceRequest& r) {
  if (r.multiplier < 8) throw ParameterError("reference_solve: multiplier must be >= 8");
  if (r.finest_nodes < 2) throw ParameterError("reference_solve: finest_nodes must be >= 2");
  if (r.fractions.empty()) throw ParameterError("reference_solve: no snapshot times");
  for (double f : r.fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw ParameterError("reference_solve: snapshot fractions must lie in [0, 1]");
  }
  if (!r.problem.datum || !r.problem.hamiltonian || !r.problem.potential) {
    throw ParameterError("reference_solve: incomplete problem");
  }

  const std::string description = reference_description(r);
  const std::string stem = "ref-" + hex(fnv1a(description));
  if (!r.cache_dir.empty()) {
    if (auto cached = load_cached(r.cache_dir, stem, description)) return std::move(*cached);
  }

  const LevelRun full = run_reference_level(r, r.multiplier * r.finest_nodes);
  const LevelRun half = run_reference_level(r, (r.multiplier / 2) * r.finest_nodes, full.n_steps);
  const TorusGrid test_grid(r.problem.dim, r.finest_nodes);
  double gap = 0.0;
  for (std::size_t i = 0; i < full.snapshots.size(); ++i) {
    gap = std::max(gap, lp_error(restrict_to(full.snapshots[i], test_grid), restrict_to(half.snapshots[i], test_grid),
                                 kInf));
  }

  ReferenceSolution sol;
  sol.fractions = r.fractions;
  sol.snapshots = full.snapshots;
  sol.provenance = {r.scheme == SchemeKind::sl ? "sl_reference" : "fd_reference",
                    full.nodes,
                    full.dt,
                    full.n_steps,
                    r.multiplier,
                    gap,
                    description,
                    false};
  if (!r.cache_dir.empty()) store_cached(r.cache_dir, stem, sol);
  return sol;
}

std::vector<GridFunction> brute_force_dp(const GridFunction& terminal, const std::vector<Point>& lattice, int n_steps,
                                         double dt, const Hamiltonian& h, const Potential& v) {
  const auto& grid = terminal.grid();
  if (lattice.empty()) throw ParameterError("brute_force_dp: empty control lattice");
  for (const Point& a : lattice) {
    if (a.dim() != grid.dim()) throw ParameterError("brute_force_dp: control dimension mismatch");
  }
  if (n_steps < 0) throw ParameterError("brute_force_dp: N must be >= 0");
  if (n_steps > 0 && !(dt > 0.0)) throw ParameterError("brute_force_dp: dt must be > 0");
  if (std::pow(static_cast<double>(lattice.size()), n_steps) > 1e7) {
    throw ParameterError("brute_force_dp: enumeration budget of 1e7 control sequences exceeded");
  }
  const double rdom = h.legendre_domain_radius();
  std::vector<double> running(lattice.size(), kInf);
  for (std::size_t j = 0; j < lattice.size(); ++j) {
    if (rdom == kInf || norm(lattice[j]) < rdom) running[j] = h.legendre(lattice[j]);
  }

  // Cost-to-go from position x with `stages` controls left.
  auto cost = [&](auto&& self, const Point& x, int stages) -> double {
    if (stages == 0) return interpolate_unchecked(terminal.values(), grid, x);
    const double vx = v.eval(x);
    double best = kInf;
    for (std::size_t j = 0; j < lattice.size(); ++j) {
      if (running[j] == kInf) continue;
      const double c = self(self, periodize(x - dt * lattice[j]), stages - 1) + dt * (running[j] + vx);
      best = std::min(best, c);
    }
    return best;
  };

  std::vector<GridFunction> levels;
  for (int n = 0; n <= n_steps; ++n) {
    std::vector<double> out(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) out[k] = cost(cost, grid.node(k), n_steps - n);
    levels.emplace_back(grid, std::move(out));
  }
  return levels;
}

const char* to_string(Direction d) { return d == Direction::forward ? "forward" : "backward"; }

}  // namespace hjt
