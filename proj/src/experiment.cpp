#include "hjtorus/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>

#include <json.hpp>

#include "hjtorus/fd_solver.hpp"
#include "hjtorus/sl_solver.hpp"

namespace hjt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

bool zero_potential(const ExperimentConfig& c) {
  return c.problem.potential.name == "zero" || c.problem.potential.amplitude == 0.0;
}

OracleKind resolve_oracle(const ExperimentConfig& c) {
  if (c.oracle.kind != OracleKind::automatic) return c.oracle.kind;
  return zero_potential(c) ? OracleKind::hopf_lax : OracleKind::reference;
}

bool uses_time_steps(const ExperimentConfig& c) {
  return c.scheme.kind == SchemeKind::sl && c.refinement.coupling == CouplingRule::h_quadratic &&
         !c.refinement.time_steps.empty();
}

std::vector<Level> config_levels(const ExperimentConfig& c) {
  std::vector<Level> out;
  const auto& r = c.refinement;
  const auto& fr = c.outputs.snapshot_fractions;
  if (uses_time_steps(c)) {
    for (double dt : r.time_steps) out.push_back({0, dt, fr});
  } else {
    for (std::size_t i = 0; i < r.grid_sizes.size(); ++i) {
      const double dt = r.coupling == CouplingRule::explicit_list ? r.time_steps[i] : 0.0;
      out.push_back({r.grid_sizes[i], dt, fr});
    }
  }
  return out;
}

// Solver output at the snapshot times of one level.
struct LevelRun {
  TorusGrid grid;
  double dt;
  int n_steps;
  std::vector<GridFunction> snapshots;
};

LevelRun run_level(const ExperimentConfig& c, const Problem& p, const Level& level) {
  const auto& fr = c.outputs.snapshot_fractions;
  if (c.scheme.kind == SchemeKind::fd) {
    const FdParams params = build_fd_level(p, fd_settings(c), coupling(c), level);
    std::vector<double> times;
    for (double f : fr) times.push_back(f * p.final_time);
    return {params.grid, params.dt, params.n_steps, fd_snapshots(*p.datum, params, times)};
  }
  const SlParams params = build_sl_level(p, sl_settings(c), coupling(c), level);
  std::vector<std::optional<GridFunction>> found(fr.size());
  const GridFunction terminal = GridFunction::sample(params.grid, [&](const Point& x) { return p.datum->eval(x); });
  sl_march(terminal, params, [&](int n, const GridFunction& u) {
    for (std::size_t i = 0; i < fr.size(); ++i) {
      if (params.n_steps - static_cast<int>(std::lround(fr[i] * params.n_steps)) == n) found[i] = u;
    }
  });
  LevelRun run{params.grid, params.dt, params.n_steps, {}};
  for (auto& f : found) run.snapshots.push_back(std::move(*f));
  return run;
}

HopfLaxProblem hopf_lax_problem(const ExperimentConfig& c, const Problem& p) {
  return {p.datum,
          p.hamiltonian,
          c.scheme.kind == SchemeKind::fd ? Direction::forward : Direction::backward,
          p.final_time,
          p.dim,
          c.oracle.scan_samples};
}

// Time at which a snapshot fraction is taken (elapsed time f T).
double snapshot_time(const ExperimentConfig& c, const Problem& p, double fraction) {
  const double elapsed = fraction * p.final_time;
  return c.scheme.kind == SchemeKind::fd ? elapsed : p.final_time - elapsed;
}

// Oracle values on the finest grid of a study; coarser grids are restricted.
struct OracleField {
  OracleKind kind = OracleKind::none;
  std::vector<GridFunction> finest;
  Provenance provenance;
};

OracleField compute_oracle(const ExperimentConfig& c, const Problem& p, const TorusGrid& finest, std::ostream* log) {
  OracleField o;
  o.kind = resolve_oracle(c);
  if (o.kind == OracleKind::hopf_lax) {
    const HopfLaxProblem hl = hopf_lax_problem(c, p);
    for (double f : c.outputs.snapshot_fractions) o.finest.push_back(hopf_lax_grid(hl, finest, snapshot_time(c, p, f)));
    o.provenance.method = "hopf_lax";
    o.provenance.nodes = finest.nodes_per_axis();
    o.provenance.description = p.describe() + ";direction=" + to_string(hl.direction) +
                               ";scan_samples=" + std::to_string(c.oracle.scan_samples);
  } else if (o.kind == OracleKind::reference) {
    ReferenceRequest req{p,
                         c.scheme.kind,
                         fd_settings(c),
                         sl_settings(c),
                         coupling(c),
                         finest.nodes_per_axis(),
                         c.oracle.reference_multiplier,
                         c.outputs.snapshot_fractions,
                         c.oracle.reference_dt,
                         c.oracle.cache_dir};
    if (log) *log << "reference solve at " << c.oracle.reference_multiplier << "x I = " << finest.nodes_per_axis() << "\n";
    ReferenceSolution ref = reference_solve(req);
    for (auto& s : ref.snapshots) o.finest.push_back(restrict_to(s, finest));
    o.provenance = ref.provenance;
  }
  return o;
}

GridFunction oracle_on(const OracleField& o, const ExperimentConfig& c, const Problem& p, const TorusGrid& grid,
                       std::size_t snapshot) {
  const TorusGrid& fine = o.finest[snapshot].grid();
  if (o.kind == OracleKind::hopf_lax && fine.nodes_per_axis() % grid.nodes_per_axis() != 0) {
    return hopf_lax_grid(hopf_lax_problem(c, p), grid, snapshot_time(c, p, c.outputs.snapshot_fractions[snapshot]));
  }
  return restrict_to(o.finest[snapshot], grid);
}

nlohmann::json provenance_json(const Provenance& pv) {
  return {{"method", pv.method},
          {"nodes", pv.nodes},
          {"dt", pv.dt},
          {"n_steps", pv.n_steps},
          {"multiplier", pv.multiplier},
          {"estimated_accuracy", pv.estimated_accuracy},
          {"description", pv.description},
          {"cache_hit", pv.cache_hit}};
}

std::filesystem::path prepare_output(const ExperimentConfig& c) {
  std::filesystem::path dir(c.outputs.directory);
  std::filesystem::create_directories(dir);
  return dir;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path);
  out << text;
}

int norm_index(const std::string& name) {
  for (std::size_t i = 0; i < kReportNormNames.size(); ++i) {
    if (name == kReportNormNames[i]) return static_cast<int>(i);
  }
  return -1;
}

}  // namespace

RateStudy rate_study(const ExperimentConfig& c, std::ostream* log) {
  validate_rate_config(c);
  const Problem p = make_problem(c);
  const std::vector<Level> levels = config_levels(c);
  RateStudy study;

  if (c.synthetic.enabled) {
    study.synthetic = true;
    std::vector<LevelErrors> rows;
    for (const Level& l : levels) {
      const double eps = l.nodes > 0 ? 1.0 / l.nodes : l.dt;
      LevelErrors row{l.nodes, l.nodes > 0 ? 1.0 / l.nodes : 0.0, l.dt, eps, {}};
      row.errors.fill(c.synthetic.constant * std::pow(eps, c.synthetic.exponent));
      rows.push_back(row);
    }
    study.report = make_error_report(std::move(rows));
    study.report.notes.push_back("synthetic errors " + format_double(c.synthetic.constant) + " * eps^" +
                                 format_double(c.synthetic.exponent));
    study.oracle.method = "synthetic";
    return study;
  }

  std::vector<LevelRun> runs;
  for (const Level& l : levels) {
    runs.push_back(run_level(c, p, l));
    if (log) {
      *log << "level I = " << runs.back().grid.nodes_per_axis() << ", dt = " << format_double(runs.back().dt)
           << ", N = " << runs.back().n_steps << "\n";
    }
  }
  for (std::size_t i = 1; i < runs.size(); ++i) {
    if (runs[i].grid.nodes_per_axis() <= runs[i - 1].grid.nodes_per_axis()) {
      throw ConfigError("refinement levels must be ordered coarse to fine");
    }
  }
  const OracleField oracle = compute_oracle(c, p, runs.back().grid, log);
  if (oracle.kind == OracleKind::none) throw ConfigError("a rate study needs an oracle; oracle.kind is \"none\"");
  study.oracle = oracle.provenance;

  std::vector<LevelErrors> rows;
  for (const LevelRun& run : runs) {
    const double h = run.grid.spacing();
    const double eps = c.scheme.kind == SchemeKind::fd ? h + run.dt : run.dt + h / run.dt;
    LevelErrors row{run.grid.nodes_per_axis(), h, run.dt, eps, {}};
    for (std::size_t s = 0; s < run.snapshots.size(); ++s) {
      const GridFunction exact = oracle_on(oracle, c, p, run.grid, s);
      std::array<double, 4> e{};
      for (std::size_t k = 0; k < kReportNorms.size(); ++k) {
        e[k] = lp_error(run.snapshots[s], exact, kReportNorms[k]);
        row.errors[k] = std::max(row.errors[k], e[k]);
      }
      for (std::size_t k : {std::size_t{1}, std::size_t{2}}) {
        ++study.interpolation_checks;
        if (!interpolation_check(e[0], e[3], e[k], kReportNorms[k])) {
          study.interpolation_failures.push_back("I = " + std::to_string(row.nodes) + ", snapshot " +
                                                 format_double(c.outputs.snapshot_fractions[s]) + ", " +
                                                 kReportNormNames[k]);
        }
      }
    }
    rows.push_back(row);
  }
  study.report = make_error_report(std::move(rows));
  study.report.notes.push_back(std::string("oracle: ") + study.oracle.method +
                               (study.oracle.estimated_accuracy > 0.0
                                    ? ", estimated accuracy " + format_double(study.oracle.estimated_accuracy)
                                    : std::string()));
  return study;
}

std::vector<Check> rate_checks(const ExperimentConfig& c, const RateStudy& study) {
  std::vector<Check> out;
  const auto& a = c.acceptance;
  const auto& fits = study.report.fits;
  auto slope_min = [&](const char* name, int k, const std::optional<double>& bound) {
    if (!bound) return;
    out.push_back({std::string(name) + " slope >= " + format_double(*bound), fits[k].slope >= *bound,
                   "slope " + format_double(fits[k].slope)});
  };
  slope_min("L1", 0, a.l1_slope_min);
  if (a.l1_slope_max) {
    out.push_back({"L1 slope <= " + format_double(*a.l1_slope_max), fits[0].slope <= *a.l1_slope_max,
                   "slope " + format_double(fits[0].slope)});
  }
  if (a.r2_min) {
    out.push_back({"L1 r2 >= " + format_double(*a.r2_min), fits[0].r2 >= *a.r2_min, "r2 " + format_double(fits[0].r2)});
  }
  slope_min("L2", 1, a.l2_slope_min);
  slope_min("L4", 2, a.l4_slope_min);
  slope_min("Linf", 3, a.linf_slope_min);
  if (a.require_interpolation_check && !study.synthetic) {
    std::string detail = std::to_string(study.interpolation_checks - static_cast<int>(study.interpolation_failures.size())) +
                         "/" + std::to_string(study.interpolation_checks) + " hold";
    if (!study.interpolation_failures.empty()) detail += "; first failure " + study.interpolation_failures.front();
    out.push_back({"interpolation inequality on every snapshot", study.interpolation_failures.empty(), detail});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Property suites

InitialDatumPtr random_trig_datum(std::mt19937_64& rng, int dim, double lip_target) {
  std::uniform_int_distribution<int> count(1, 3);
  std::uniform_int_distribution<int> wave(-2, 2);
  std::uniform_real_distribution<double> amp(-1.0, 1.0);
  std::uniform_real_distribution<double> phase(0.0, 2.0 * std::numbers::pi);
  std::vector<TrigTerm> terms(static_cast<std::size_t>(count(rng)));
  double lip = 0.0;
  for (auto& t : terms) {
    t.wavevector.assign(static_cast<std::size_t>(dim), 0);
    while (std::all_of(t.wavevector.begin(), t.wavevector.end(), [](int k) { return k == 0; })) {
      for (int& k : t.wavevector) k = wave(rng);
    }
    t.amplitude = amp(rng);
    t.phase = phase(rng);
    double k2 = 0.0;
    for (int k : t.wavevector) k2 += static_cast<double>(k) * k;
    lip += std::abs(t.amplitude) * 2.0 * std::numbers::pi * std::sqrt(k2);
  }
  if (lip > 0.0) {
    for (auto& t : terms) t.amplitude *= lip_target / lip;
  }
  return trig_polynomial_datum(std::move(terms), dim);
}

namespace {

// Running minimum of an inequality's slack.
struct Margin {
  Margin(std::string n, double tol) : name(std::move(n)), tolerance(tol) {}

  std::string name;
  double tolerance;
  double worst = kInf;
  std::string detail;
  std::string error;  // hard failure (exception) if non-empty
  int samples = 0;

  void observe(double slack, const std::string& where) {
    ++samples;
    if (slack < worst) {
      worst = slack;
      detail = where;
    }
  }
  void fail(const std::string& what) {
    if (error.empty()) error = what;
  }
  PropertyResult result() const {
    if (!error.empty()) return {name, false, worst == kInf ? -kInf : worst, error};
    if (samples == 0) return {name, true, 0.0, "no samples"};
    const bool ok = worst >= -tolerance;
    return {name, ok, worst,
            std::to_string(samples) + " checks, tolerance " + format_double(tolerance) + ", worst at " + detail};
  }
};

std::vector<std::string> selected(const ExperimentConfig& c, const std::vector<std::string>& names) {
  std::vector<std::string> out;
  for (const auto& s : c.properties.suite) {
    if (s == "all") return names;
    if (std::find(names.begin(), names.end(), s) == names.end()) {
      std::string allowed;
      for (const auto& n : names) allowed += (allowed.empty() ? "" : ", ") + n;
      throw ConfigError("properties.suite entry '" + s + "' is not one of: all, " + allowed);
    }
    if (std::find(out.begin(), out.end(), s) == out.end()) out.push_back(s);
  }
  return out;
}

bool wants(const std::vector<std::string>& sel, const char* name) {
  return std::find(sel.begin(), sel.end(), name) != sel.end();
}

double max_abs_diff(const GridFunction& a, const GridFunction& b, double shift) {
  double m = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) m = std::max(m, std::abs(a[k] - b[k] - shift));
  return m;
}

double min_diff(const GridFunction& upper, const GridFunction& lower) {
  double m = kInf;
  for (std::size_t k = 0; k < upper.size(); ++k) m = std::min(m, upper[k] - lower[k]);
  return m;
}

// a + b + shift
class SumDatum final : public InitialDatum {
 public:
  SumDatum(InitialDatumPtr a, InitialDatumPtr b, double shift) : a_(std::move(a)), b_(std::move(b)), shift_(shift) {}
  double eval(const Point& x) const override { return a_->eval(x) + b_->eval(x) + shift_; }
  double lipschitz_bound() const override { return a_->lipschitz_bound() + b_->lipschitz_bound(); }
  double semiconcavity_bound() const override { return a_->semiconcavity_bound() + b_->semiconcavity_bound(); }
  int dim() const override { return a_->dim(); }
  std::string describe() const override {
    return "sum(" + a_->describe() + "," + b_->describe() + "," + format_double(shift_) + ")";
  }

 private:
  InitialDatumPtr a_;
  InitialDatumPtr b_;
  double shift_;
};

std::string where(const char* what, int index, int step) {
  return std::string(what) + " " + std::to_string(index) + ", step " + std::to_string(step);
}

}  // namespace

std::vector<std::string> fd_property_names() {
  return {"lipschitz", "stability", "semiconcavity", "comparison", "constant_shift", "monotone_update"};
}

std::vector<std::string> sl_property_names() {
  return {"uniform_bound",        "value_consistency",    "constant_shift", "dp_monotonicity",
          "semiconcavity_refinement", "lipschitz_refinement", "dp_equivalence"};
}

std::vector<PropertyResult> fd_property_suite(const ExperimentConfig& c, std::uint64_t seed) {
  const std::vector<std::string> sel = selected(c, fd_property_names());
  std::vector<PropertyResult> results;
  if (sel.empty()) return results;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit01(0.0, 1.0);
  const auto& pc = c.properties;
  Problem base = make_problem(c);
  base.final_time = pc.final_time;
  FdSettings settings = fd_settings(c);
  settings.enforce_cfl = !pc.bypass_cfl;
  const Coupling cfl{CouplingRule::cfl, pc.dt_fraction};
  const Level level{pc.grid_size, 0.0, {}};
  const double h0 = std::abs(base.hamiltonian->eval(Point(base.dim)));

  Margin lip{"lipschitz", 1e-10};
  Margin stab{"stability", 1e-10};
  Margin conc{"semiconcavity", 1e-9};
  Margin comp{"comparison", 1e-12};
  Margin shift{"constant_shift", 1e-12};
  Margin mono{"monotone_update", 0.0};

  const bool march = wants(sel, "lipschitz") || wants(sel, "stability") || wants(sel, "semiconcavity") ||
                     wants(sel, "constant_shift");
  for (int i = 0; march && i < pc.instances; ++i) {
    Problem p = base;
    p.datum = random_trig_datum(rng, p.dim, 1.0 + 3.0 * unit01(rng));
    const double c_shift = 4.0 * unit01(rng) - 2.0;
    FdParams params = build_fd_level(p, settings, cfl, level);
    GridFunction u = GridFunction::sample(params.grid, [&](const Point& x) { return p.datum->eval(x); });
    const double lip0 = lipschitz_estimate(u);
    const double sup0 = u.sup_norm();
    double conc_prev = semiconcavity_estimate(u);
    {
      const GridFunction a = fd_step(add_constant(u, c_shift), params);
      const GridFunction b = fd_step(u, params);
      const double scale = 1.0 + std::abs(c_shift) + sup0;
      shift.observe(-max_abs_diff(a, b, c_shift) / scale, where("instance", i, 1));
    }
    for (int n = 1; n <= params.n_steps; ++n) {
      try {
        u = fd_step(u, params);
      } catch (const InvariantViolation& e) {
        lip.fail(where("instance", i, n) + ": " + e.what());
        break;
      }
      lip.observe(lip0 - lipschitz_estimate(u), where("instance", i, n));
      stab.observe(sup0 + n * params.dt * h0 - u.sup_norm(), where("instance", i, n));
      const double cn = semiconcavity_estimate(u);
      conc.observe(conc_prev - cn, where("instance", i, n));
      conc_prev = cn;
    }
  }

  for (int j = 0; wants(sel, "comparison") && j < pc.pairs; ++j) {
    Problem p = base;
    p.datum = random_trig_datum(rng, p.dim, 1.0 + 3.0 * unit01(rng));
    const FdParams params = build_fd_level(p, settings, cfl, level);
    const GridFunction u = GridFunction::sample(params.grid, [&](const Point& x) { return p.datum->eval(x); });
    // Nonnegative rough perturbation that keeps every slope within R.
    const double room = 0.5 * params.grid.spacing() * (params.slope_budget - lipschitz_estimate(u)) * 0.99;
    const double lift = 0.1 * unit01(rng);
    std::vector<double> vv(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) vv[k] = u[k] + lift + room * unit01(rng);
    const GridFunction v(params.grid, std::move(vv));
    try {
      comp.observe(min_diff(fd_step(v, params), fd_step(u, params)), where("pair", j, 1));
    } catch (const InvariantViolation& e) {
      comp.fail(where("pair", j, 1) + ": " + e.what());
    }
  }

  if (wants(sel, "monotone_update")) {
    const FdParams params = build_fd_level(base, settings, cfl, level);
    const MonotoneReport rep = verify_monotone_update(*params.flux, params.slope_budget, params.grid.spacing(),
                                                      params.dt, pc.trials, base.dim, rng, settings.enforce_cfl);
    for (int t = 0; t < rep.trials; ++t) mono.observe(0.0, "trials");
    if (rep.violations > 0) {
      mono.fail(std::to_string(rep.violations) + "/" + std::to_string(rep.trials) +
                " trials decreased the update, worst by " + format_double(rep.max_violation));
      mono.worst = -rep.max_violation;
    }
  }

  for (const Margin* m : {&lip, &stab, &conc, &comp, &shift, &mono}) {
    if (wants(sel, m->name.c_str())) results.push_back(m->result());
  }
  return results;
}

std::vector<PropertyResult> sl_property_suite(const ExperimentConfig& c, std::uint64_t seed) {
  const std::vector<std::string> sel = selected(c, sl_property_names());
  std::vector<PropertyResult> results;
  if (sel.empty()) return results;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit01(0.0, 1.0);
  const auto& pc = c.properties;
  Problem base = make_problem(c);
  base.final_time = pc.final_time;
  const SlSettings settings = sl_settings(c);
  const double dt0 = pc.sl_time_steps.empty() ? 0.1 : pc.sl_time_steps.front();
  const Coupling explicit_rule{CouplingRule::explicit_list, 1.0};
  const Level level{pc.grid_size, dt0, {}};
  const double min_l = std::abs(base.hamiltonian->legendre_min());

  Margin bound{"uniform_bound", 1e-9};
  Margin consistency{"value_consistency", 1e-10};
  Margin shift{"constant_shift", 1e-10};
  Margin mono{"dp_monotonicity", 1e-9};
  Margin conc{"semiconcavity_refinement", 0.0};
  Margin lipr{"lipschitz_refinement", 0.0};
  Margin dp{"dp_equivalence", 1e-10};

  const bool solve_instances =
      wants(sel, "uniform_bound") || wants(sel, "value_consistency") || wants(sel, "constant_shift");
  for (int i = 0; solve_instances && i < pc.instances; ++i) {
    Problem p = base;
    p.datum = random_trig_datum(rng, p.dim, 0.5 + 2.5 * unit01(rng));
    p.potential = cosine_potential(2.0 * unit01(rng) - 1.0, p.dim);
    const double c_shift = 4.0 * unit01(rng) - 2.0;
    try {
      const SlParams params = build_sl_level(p, settings, explicit_rule, level);
      const SlSolution sol = sl_solve(*p.datum, params);
      const double sup_g = sol.levels.back().sup_norm();
      const double rate = p.potential->sup_norm() + min_l;
      for (int n = 0; n <= params.n_steps; ++n) {
        const auto idx = static_cast<std::size_t>(n);
        bound.observe(sup_g + (params.n_steps - n) * params.dt * rate - sol.levels[idx].sup_norm(),
                      where("instance", i, n));
        if (n < params.n_steps) {
          double err = 0.0;
          for (std::size_t k = 0; k < sol.levels[idx].size(); ++k) {
            err = std::max(err, std::abs(sol.controls[idx].value[k] - sol.levels[idx][k]));
          }
          consistency.observe(-err, where("instance", i, n));
        }
      }
      if (wants(sel, "constant_shift")) {
        const SlSolution shifted = sl_solve(*shifted_datum(p.datum, c_shift), params);
        double err = 0.0;
        for (std::size_t n = 0; n < sol.levels.size(); ++n) {
          err = std::max(err, max_abs_diff(shifted.levels[n], sol.levels[n], c_shift));
        }
        shift.observe(-err / (1.0 + std::abs(c_shift)), where("instance", i, 0));
      }
    } catch (const InvariantViolation& e) {
      bound.fail(where("instance", i, 0) + ": " + e.what());
    }
  }

  for (int j = 0; wants(sel, "dp_monotonicity") && j < pc.pairs; ++j) {
    Problem p = base;
    p.potential = cosine_potential(2.0 * unit01(rng) - 1.0, p.dim);
    const InitialDatumPtr g = random_trig_datum(rng, p.dim, 0.5 + 2.0 * unit01(rng));
    // g' = g + bump + sup|bump| + c0 >= g. The Lipschitz bound of a trig
    // polynomial with nonzero wavevectors dominates its sup norm.
    const InitialDatumPtr bump = random_trig_datum(rng, p.dim, 0.5 * unit01(rng));
    const double c0 = 0.2 * unit01(rng);
    const auto upper = std::make_shared<SumDatum>(g, bump, bump->lipschitz_bound() + c0);
    p.datum = upper;  // the larger Lipschitz bound sizes the control box
    try {
      const SlParams params = build_sl_level(p, settings, explicit_rule, level);
      const SlSolution lo = sl_solve(*g, params);
      const SlSolution hi = sl_solve(*upper, params);
      for (std::size_t n = 0; n < lo.levels.size(); ++n) {
        mono.observe(min_diff(hi.levels[n], lo.levels[n]), where("pair", j, static_cast<int>(n)));
      }
    } catch (const InvariantViolation& e) {
      mono.fail(where("pair", j, 0) + ": " + e.what());
    }
  }

  if (wants(sel, "semiconcavity_refinement") || wants(sel, "lipschitz_refinement")) {
    const double cc = c.refinement.coupling == CouplingRule::h_quadratic ? c.refinement.c : 1.0;
    const Coupling rule{CouplingRule::h_quadratic, cc};
    std::vector<double> concs;
    std::vector<double> lips;
    std::vector<int> nodes;
    try {
      for (double dt : pc.sl_time_steps) {
        const SlParams params = build_sl_level(base, settings, rule, Level{0, dt, {}});
        double sc = -kInf;
        double lp = 0.0;
        const GridFunction g = GridFunction::sample(params.grid, [&](const Point& x) { return base.datum->eval(x); });
        sl_march(g, params, [&](int, const GridFunction& u) {
          sc = std::max(sc, semiconcavity_estimate(u));
          lp = std::max(lp, lipschitz_estimate(u));
        });
        concs.push_back(sc);
        lips.push_back(lp);
        nodes.push_back(params.grid.nodes_per_axis());
      }
      for (std::size_t k = 0; k < concs.size(); ++k) {
        const double rel = std::abs(concs[k] / concs.back() - 1.0);
        conc.observe(0.10 - rel, "I = " + std::to_string(nodes[k]) + " (sup estimate " + format_double(concs[k]) +
                                     ", finest " + format_double(concs.back()) + ")");
        if (k > 0) {
          const double growth = lips[k] / lips[k - 1] - 1.0;
          lipr.observe(0.05 - growth, "I = " + std::to_string(nodes[k]) + " (max slope " + format_double(lips[k]) +
                                          ", previous " + format_double(lips[k - 1]) + ")");
        }
      }
    } catch (const InvariantViolation& e) {
      conc.fail(e.what());
      lipr.fail(e.what());
    }
  }

  for (int j = 0; wants(sel, "dp_equivalence") && j < pc.dp_instances; ++j) {
    std::uniform_int_distribution<int> nodes_dist(2, 8);
    std::uniform_int_distribution<int> steps_dist(1, 3);
    std::uniform_int_distribution<int> half_dist(1, 4);
    const int nodes = nodes_dist(rng);
    const int n_steps = steps_dist(rng);
    const int half = half_dist(rng);
    const TorusGrid grid(1, nodes);
    double dt = 0.05 + 0.25 * unit01(rng);
    const double rdom = base.hamiltonian->legendre_domain_radius();
    if (half * grid.spacing() / dt >= 0.9 * rdom) dt = half * grid.spacing() / (0.5 * rdom);
    const PotentialPtr v = cosine_potential(2.0 * unit01(rng) - 1.0, 1);
    std::vector<double> gv(grid.size());
    for (double& x : gv) x = 2.0 * unit01(rng) - 1.0;
    const GridFunction terminal(grid, std::move(gv));
    // Controls alpha = m h / dt, m = -half..half, so every foot is a node.
    SlParams params = make_sl_params(grid, base.hamiltonian, v, n_steps * dt, n_steps, 1.0, 2 * half + 1, false, false);
    params.control_box = half * grid.spacing() / params.dt;
    std::vector<Point> lattice;
    for (int m = 0; m < params.control_samples; ++m) {
      lattice.push_back(Point{-params.control_box + 2.0 * params.control_box * m / (params.control_samples - 1)});
    }
    try {
      const std::vector<GridFunction> table =
          brute_force_dp(terminal, lattice, n_steps, params.dt, *base.hamiltonian, *v);
      GridFunction u = terminal;
      double err = 0.0;
      for (int n = n_steps - 1; n >= 0; --n) {
        u = sl_step(u, params, n).value;
        err = std::max(err, max_abs_diff(u, table[static_cast<std::size_t>(n)], 0.0));
      }
      dp.observe(-err, "instance " + std::to_string(j) + " (I = " + std::to_string(nodes) +
                           ", N = " + std::to_string(n_steps) + ", controls = " + std::to_string(2 * half + 1) + ")");
    } catch (const Error& e) {
      dp.fail("instance " + std::to_string(j) + ": " + e.what());
    }
  }

  for (const Margin* m : {&bound, &consistency, &shift, &mono, &conc, &lipr, &dp}) {
    if (wants(sel, m->name.c_str())) results.push_back(m->result());
  }
  return results;
}

void write_property_report_csv(std::ostream& os, std::span<const PropertyResult> results) {
  os << "name,passed,worst_margin,detail\n";
  for (const auto& r : results) {
    std::string detail = r.detail;
    std::replace(detail.begin(), detail.end(), ',', ';');
    std::replace(detail.begin(), detail.end(), '\n', ' ');
    os << r.name << ',' << (r.passed ? "true" : "false") << ',' << format_double(r.worst_margin) << ',' << detail
       << '\n';
  }
}

// ---------------------------------------------------------------------------
// Subcommands

namespace {

int report_failure(std::ostream& log, const std::exception& e) {
  log << "error: " << e.what() << "\n";
  return kExitFailure;
}

void write_snapshot(const std::filesystem::path& dir, std::size_t j, const GridFunction& u, nlohmann::json sidecar) {
  const std::string stem = "snapshot_" + std::to_string(j);
  {
    std::ofstream out(dir / (stem + ".csv"));
    write_csv(out, u);
  }
  sidecar["file"] = stem + ".csv";
  write_text(dir / (stem + ".json"), sidecar.dump(2) + "\n");
}

}  // namespace

int run_solve(const ExperimentConfig& c, std::ostream& log) {
  const Problem p = make_problem(c);
  const std::vector<Level> levels = config_levels(c);
  const Level level = levels.back();
  const auto& fr = c.outputs.snapshot_fractions;
  const std::filesystem::path dir = prepare_output(c);
  write_text(dir / "config.toml", serialize_config(c));

  std::vector<GridFunction> snapshots;
  std::vector<int> snapshot_levels;
  TorusGrid grid(p.dim, 2);
  double dt = 0.0;
  int n_steps = 0;
  try {
    if (c.scheme.kind == SchemeKind::fd) {
      const FdParams params = build_fd_level(p, fd_settings(c), coupling(c), level);
      grid = params.grid;
      dt = params.dt;
      n_steps = params.n_steps;
      std::optional<FdTrajectory> traj;
      try {
        traj = fd_solve(*p.datum, params);
      } catch (const FdSolveError& e) {
        const FdTrajectory& part = e.partial();
        std::ofstream diag(dir / "diagnostics.csv");
        write_diagnostics_csv(diag, part.diagnostics);
        std::ofstream last(dir / ("partial_step_" + std::to_string(part.levels.size() - 1) + ".csv"));
        write_csv(last, part.levels.back());
        return report_failure(log, e);
      }
      std::ofstream diag(dir / "diagnostics.csv");
      write_diagnostics_csv(diag, traj->diagnostics);
      for (double f : fr) {
        snapshots.push_back(time_interpolate(*traj, f * p.final_time));
        snapshot_levels.push_back(static_cast<int>(std::lround(f * n_steps)));
      }
    } else {
      const SlParams params = build_sl_level(p, sl_settings(c), coupling(c), level);
      grid = params.grid;
      dt = params.dt;
      n_steps = params.n_steps;
      const SlSolution sol = sl_solve(*p.datum, params);
      for (std::size_t j = 0; j < fr.size(); ++j) {
        const int n = n_steps - static_cast<int>(std::lround(fr[j] * n_steps));
        snapshots.push_back(sol.levels[static_cast<std::size_t>(n)]);
        snapshot_levels.push_back(n);
        if (n < n_steps) {
          std::ofstream out(dir / ("controls_" + std::to_string(j) + ".csv"));
          write_control_csv(out, sol.controls[static_cast<std::size_t>(n)]);
        }
      }
    }
  } catch (const PreconditionError& e) {
    return report_failure(log, e);
  } catch (const InvariantViolation& e) {
    return report_failure(log, e);
  }

  OracleField oracle;
  if (resolve_oracle(c) != OracleKind::none) oracle = compute_oracle(c, p, grid, &log);
  for (std::size_t j = 0; j < snapshots.size(); ++j) {
    nlohmann::json side{{"fraction", fr[j]},
                        {"time", snapshot_time(c, p, fr[j])},
                        {"level", snapshot_levels[j]},
                        {"scheme", to_string(c.scheme.kind)},
                        {"nodes", grid.nodes_per_axis()},
                        {"dt", dt},
                        {"n_steps", n_steps},
                        {"problem", p.describe()}};
    if (oracle.kind != OracleKind::none) {
      const GridFunction exact = oracle_on(oracle, c, p, grid, j);
      std::vector<double> err(grid.size());
      for (std::size_t k = 0; k < err.size(); ++k) err[k] = std::abs(snapshots[j][k] - exact[k]);
      std::ofstream out(dir / ("error_" + std::to_string(j) + ".csv"));
      write_csv(out, GridFunction(grid, std::move(err)));
      nlohmann::json errors;
      for (const auto& name : c.outputs.norms) {
        errors[name] = lp_error(snapshots[j], exact, kReportNorms[static_cast<std::size_t>(norm_index(name))]);
      }
      side["errors"] = errors;
      side["oracle"] = provenance_json(oracle.provenance);
    }
    write_snapshot(dir, j, snapshots[j], side);
    log << "snapshot " << j << ": t = " << format_double(snapshot_time(c, p, fr[j])) << ", level " << snapshot_levels[j]
        << "\n";
  }
  log << "solve: I = " << grid.nodes_per_axis() << ", dt = " << format_double(dt) << ", N = " << n_steps
      << ", artifacts in " << dir.string() << "\n";
  return kExitOk;
}

int run_rates(const ExperimentConfig& c, std::ostream& log) {
  RateStudy study;
  try {
    study = rate_study(c, &log);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    return report_failure(log, e);
  }
  const std::filesystem::path dir = prepare_output(c);
  write_text(dir / "config.toml", serialize_config(c));
  {
    std::ofstream out(dir / "report.csv");
    write_error_report_csv(out, study.report);
  }
  write_text(dir / "oracle.json", provenance_json(study.oracle).dump(2) + "\n");

  for (const auto& name : c.outputs.norms) {
    const auto& fit = study.report.fits[static_cast<std::size_t>(norm_index(name))];
    log << name << " slope " << format_double(fit.slope) << ", r2 " << format_double(fit.r2) << "\n";
  }
  bool ok = true;
  for (const Check& ch : rate_checks(c, study)) {
    log << (ch.passed ? "PASS " : "FAIL ") << ch.name << ": " << ch.detail << "\n";
    ok = ok && ch.passed;
  }
  return ok ? kExitOk : kExitFailure;
}

int run_properties(const ExperimentConfig& c, std::uint64_t seed, std::ostream& log) {
  std::vector<PropertyResult> results;
  try {
    results = c.scheme.kind == SchemeKind::fd ? fd_property_suite(c, seed) : sl_property_suite(c, seed);
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    return report_failure(log, e);
  }
  const std::filesystem::path dir = prepare_output(c);
  {
    std::ofstream out(dir / "properties.csv");
    write_property_report_csv(out, results);
  }
  bool ok = true;
  for (const auto& r : results) {
    log << (r.passed ? "PASS " : "FAIL ") << r.name << ": worst margin " << format_double(r.worst_margin) << " ("
        << r.detail << ")\n";
    ok = ok && r.passed;
  }
  log << results.size() << " properties checked\n";
  return ok ? kExitOk : kExitFailure;
}

}  // namespace hjt
