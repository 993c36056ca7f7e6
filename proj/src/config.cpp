#include "hjtorus/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>

#define TOML_EXCEPTIONS 1
// Shortest round-trip float formatting; libstdc++ provides floating-point <charconv>.
#define TOML_FLOAT_CHARCONV 1
#include <toml.hpp>

namespace hjt {

namespace {

std::string key_path(const std::string& section, const std::string& key) {
  return section.empty() ? key : section + "." + key;
}

void check_keys(const toml::table& t, const std::string& section, std::initializer_list<const char*> allowed) {
  for (const auto& [k, v] : t) {
    const std::string name(k.str());
    if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return name == a; })) {
      throw ConfigError("unknown key '" + key_path(section, name) + "'");
    }
  }
}

const toml::table* subtable(const toml::table& t, const std::string& section, const char* key) {
  const toml::node* n = t.get(key);
  if (!n) return nullptr;
  if (!n->is_table()) throw ConfigError("'" + key_path(section, key) + "' must be a table");
  return n->as_table();
}

double as_double(const toml::node& n, const std::string& path) {
  if (auto d = n.value_exact<double>()) return *d;
  if (auto i = n.value_exact<std::int64_t>()) return static_cast<double>(*i);
  throw ConfigError("'" + path + "' must be a number");
}

int as_int(const toml::node& n, const std::string& path) {
  if (auto i = n.value_exact<std::int64_t>()) {
    if (*i < -2147483647 || *i > 2147483647) throw ConfigError("'" + path + "' is out of range");
    return static_cast<int>(*i);
  }
  throw ConfigError("'" + path + "' must be an integer");
}

void read(const toml::table& t, const std::string& s, const char* key, double& out) {
  if (const toml::node* n = t.get(key)) out = as_double(*n, key_path(s, key));
}

void read(const toml::table& t, const std::string& s, const char* key, int& out) {
  if (const toml::node* n = t.get(key)) out = as_int(*n, key_path(s, key));
}

void read(const toml::table& t, const std::string& s, const char* key, bool& out) {
  if (const toml::node* n = t.get(key)) {
    auto b = n->value_exact<bool>();
    if (!b) throw ConfigError("'" + key_path(s, key) + "' must be a boolean");
    out = *b;
  }
}

void read(const toml::table& t, const std::string& s, const char* key, std::string& out) {
  if (const toml::node* n = t.get(key)) {
    auto v = n->value_exact<std::string>();
    if (!v) throw ConfigError("'" + key_path(s, key) + "' must be a string");
    out = *v;
  }
}

// A number, or the string `word` meaning "unset".
void read(const toml::table& t, const std::string& s, const char* key, std::optional<double>& out,
          const char* word) {
  const toml::node* n = t.get(key);
  if (!n) return;
  if (auto str = n->value_exact<std::string>()) {
    if (*str != word) throw ConfigError("'" + key_path(s, key) + "' must be a number or \"" + word + "\"");
    out.reset();
    return;
  }
  out = as_double(*n, key_path(s, key));
}

template <class T, class F>
void read_array(const toml::table& t, const std::string& s, const char* key, std::vector<T>& out, F convert) {
  const toml::node* n = t.get(key);
  if (!n) return;
  const toml::array* arr = n->as_array();
  if (!arr) throw ConfigError("'" + key_path(s, key) + "' must be an array");
  out.clear();
  for (std::size_t i = 0; i < arr->size(); ++i) {
    out.push_back(convert(*arr->get(i), key_path(s, key) + "[" + std::to_string(i) + "]"));
  }
}

void read_array(const toml::table& t, const std::string& s, const char* key, std::vector<double>& out) {
  read_array(t, s, key, out, as_double);
}

void read_array(const toml::table& t, const std::string& s, const char* key, std::vector<int>& out) {
  read_array(t, s, key, out, as_int);
}

void read_array(const toml::table& t, const std::string& s, const char* key, std::vector<std::string>& out) {
  read_array(t, s, key, out, [](const toml::node& n, const std::string& path) {
    auto v = n.value_exact<std::string>();
    if (!v) throw ConfigError("'" + path + "' must be a string");
    return *v;
  });
}

template <class E>
E parse_enum(const std::string& text, const std::string& path, std::initializer_list<std::pair<const char*, E>> names) {
  for (const auto& [name, value] : names) {
    if (text == name) return value;
  }
  std::string allowed;
  for (const auto& [name, value] : names) allowed += std::string(allowed.empty() ? "" : ", ") + name;
  throw ConfigError("'" + path + "' = \"" + text + "\" is not one of: " + allowed);
}

void parse_problem(const toml::table& t, ProblemSection& p) {
  const std::string s = "problem";
  check_keys(t, s, {"dimension", "final_time", "hamiltonian", "potential", "datum"});
  read(t, s, "dimension", p.dimension);
  read(t, s, "final_time", p.final_time);
  if (const auto* h = subtable(t, s, "hamiltonian")) {
    const std::string hs = "problem.hamiltonian";
    check_keys(*h, hs, {"name", "scale", "delta"});
    read(*h, hs, "name", p.hamiltonian.name);
    read(*h, hs, "scale", p.hamiltonian.scale);
    read(*h, hs, "delta", p.hamiltonian.delta);
  }
  if (const auto* v = subtable(t, s, "potential")) {
    const std::string vs = "problem.potential";
    check_keys(*v, vs, {"name", "amplitude"});
    read(*v, vs, "name", p.potential.name);
    read(*v, vs, "amplitude", p.potential.amplitude);
  }
  if (const auto* g = subtable(t, s, "datum")) {
    const std::string gs = "problem.datum";
    check_keys(*g, gs, {"name", "amplitude", "frequency", "terms"});
    read(*g, gs, "name", p.datum.name);
    read(*g, gs, "amplitude", p.datum.amplitude);
    read(*g, gs, "frequency", p.datum.frequency);
    if (const toml::node* n = g->get("terms")) {
      const toml::array* arr = n->as_array();
      if (!arr) throw ConfigError("'problem.datum.terms' must be an array of tables");
      p.datum.terms.clear();
      for (std::size_t i = 0; i < arr->size(); ++i) {
        const std::string ts = "problem.datum.terms[" + std::to_string(i) + "]";
        const toml::table* term = arr->get(i)->as_table();
        if (!term) throw ConfigError("'" + ts + "' must be a table");
        check_keys(*term, ts, {"amplitude", "wavevector", "phase"});
        TrigTermSpec spec;
        read(*term, ts, "amplitude", spec.amplitude);
        read(*term, ts, "phase", spec.phase);
        read_array(*term, ts, "wavevector", spec.wavevector);
        p.datum.terms.push_back(spec);
      }
    }
  }
}

void parse_scheme(const toml::table& t, SchemeSection& sc) {
  const std::string s = "scheme";
  check_keys(t, s,
             {"kind", "numerical_hamiltonian", "alpha", "alpha_inflation", "slope_inflation", "enforce_cfl",
              "control_box", "control_samples", "polish"});
  std::string kind = to_string(sc.kind);
  read(t, s, "kind", kind);
  sc.kind = parse_enum<SchemeKind>(kind, "scheme.kind", {{"fd", SchemeKind::fd}, {"sl", SchemeKind::sl}});
  std::string flux = to_string(sc.numerical_hamiltonian);
  read(t, s, "numerical_hamiltonian", flux);
  sc.numerical_hamiltonian = parse_enum<FluxKind>(
      flux, "scheme.numerical_hamiltonian",
      {{"lax_friedrichs", FluxKind::lax_friedrichs}, {"separable_1d", FluxKind::separable_1d}});
  read(t, s, "alpha", sc.alpha, "auto");
  read(t, s, "alpha_inflation", sc.alpha_inflation);
  read(t, s, "slope_inflation", sc.slope_inflation);
  read(t, s, "enforce_cfl", sc.enforce_cfl);
  read(t, s, "control_box", sc.control_box, "auto");
  read(t, s, "control_samples", sc.control_samples);
  read(t, s, "polish", sc.polish);
}

void parse_refinement(const toml::table& t, RefinementSection& r) {
  const std::string s = "refinement";
  check_keys(t, s, {"grid_sizes", "time_steps", "coupling", "c"});
  read_array(t, s, "grid_sizes", r.grid_sizes);
  read_array(t, s, "time_steps", r.time_steps);
  std::string rule = to_string(r.coupling);
  read(t, s, "coupling", rule);
  r.coupling = parse_enum<CouplingRule>(rule, "refinement.coupling",
                                        {{"cfl", CouplingRule::cfl},
                                         {"dt_linear", CouplingRule::dt_linear},
                                         {"dt_sqrt", CouplingRule::dt_sqrt},
                                         {"h_quadratic", CouplingRule::h_quadratic},
                                         {"explicit", CouplingRule::explicit_list}});
  read(t, s, "c", r.c);
}

void parse_oracle(const toml::table& t, OracleSection& o) {
  const std::string s = "oracle";
  check_keys(t, s, {"kind", "reference_multiplier", "reference_dt", "scan_samples", "cache_dir"});
  std::string kind = to_string(o.kind);
  read(t, s, "kind", kind);
  o.kind = parse_enum<OracleKind>(kind, "oracle.kind",
                                  {{"auto", OracleKind::automatic},
                                   {"hopf_lax", OracleKind::hopf_lax},
                                   {"reference", OracleKind::reference},
                                   {"none", OracleKind::none}});
  read(t, s, "reference_multiplier", o.reference_multiplier);
  read(t, s, "reference_dt", o.reference_dt, "coupled");
  read(t, s, "scan_samples", o.scan_samples);
  read(t, s, "cache_dir", o.cache_dir);
}

void parse_outputs(const toml::table& t, OutputsSection& o) {
  const std::string s = "outputs";
  check_keys(t, s, {"directory", "norms", "snapshot_fractions"});
  read(t, s, "directory", o.directory);
  read_array(t, s, "norms", o.norms);
  read_array(t, s, "snapshot_fractions", o.snapshot_fractions);
}

void parse_acceptance(const toml::table& t, AcceptanceSection& a) {
  const std::string s = "acceptance";
  check_keys(t, s,
             {"l1_slope_min", "l1_slope_max", "r2_min", "l2_slope_min", "l4_slope_min", "linf_slope_min",
              "require_interpolation_check"});
  read(t, s, "l1_slope_min", a.l1_slope_min, "none");
  read(t, s, "l1_slope_max", a.l1_slope_max, "none");
  read(t, s, "r2_min", a.r2_min, "none");
  read(t, s, "l2_slope_min", a.l2_slope_min, "none");
  read(t, s, "l4_slope_min", a.l4_slope_min, "none");
  read(t, s, "linf_slope_min", a.linf_slope_min, "none");
  read(t, s, "require_interpolation_check", a.require_interpolation_check);
}

void parse_properties(const toml::table& t, PropertiesSection& p) {
  const std::string s = "properties";
  check_keys(t, s,
             {"suite", "instances", "pairs", "grid_size", "dt_fraction", "bypass_cfl", "final_time", "sl_time_steps",
              "trials", "dp_instances"});
  read_array(t, s, "suite", p.suite);
  read(t, s, "instances", p.instances);
  read(t, s, "pairs", p.pairs);
  read(t, s, "grid_size", p.grid_size);
  read(t, s, "dt_fraction", p.dt_fraction);
  read(t, s, "bypass_cfl", p.bypass_cfl);
  read(t, s, "final_time", p.final_time);
  read_array(t, s, "sl_time_steps", p.sl_time_steps);
  read(t, s, "trials", p.trials);
  read(t, s, "dp_instances", p.dp_instances);
}

void parse_synthetic(const toml::table& t, SyntheticSection& y) {
  const std::string s = "synthetic";
  check_keys(t, s, {"enabled", "constant", "exponent"});
  read(t, s, "enabled", y.enabled);
  read(t, s, "constant", y.constant);
  read(t, s, "exponent", y.exponent);
}

template <class T>
toml::array to_array(const std::vector<T>& v) {
  toml::array a;
  for (const T& x : v) {
    if constexpr (std::is_same_v<T, int>) {
      a.push_back(static_cast<std::int64_t>(x));
    } else {
      a.push_back(x);
    }
  }
  return a;
}

void put_optional(toml::table& t, const char* key, const std::optional<double>& v, const char* word) {
  if (v) {
    t.insert_or_assign(key, *v);
  } else {
    t.insert_or_assign(key, word);
  }
}

}  // namespace

ExperimentConfig parse_config(const std::string& toml_text) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << "TOML syntax error: " << e.description() << " (line " << e.source().begin.line << ")";
    throw ConfigError(msg.str());
  }
  check_keys(root, "", {"problem", "scheme", "refinement", "oracle", "outputs", "acceptance", "properties", "synthetic"});
  ExperimentConfig c;
  if (const auto* t = subtable(root, "", "problem")) parse_problem(*t, c.problem);
  if (const auto* t = subtable(root, "", "scheme")) parse_scheme(*t, c.scheme);
  if (const auto* t = subtable(root, "", "refinement")) parse_refinement(*t, c.refinement);
  if (const auto* t = subtable(root, "", "oracle")) parse_oracle(*t, c.oracle);
  if (const auto* t = subtable(root, "", "outputs")) parse_outputs(*t, c.outputs);
  if (const auto* t = subtable(root, "", "acceptance")) parse_acceptance(*t, c.acceptance);
  if (const auto* t = subtable(root, "", "properties")) parse_properties(*t, c.properties);
  if (const auto* t = subtable(root, "", "synthetic")) parse_synthetic(*t, c.synthetic);
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  toml::table root;

  toml::table problem;
  problem.insert("dimension", static_cast<std::int64_t>(c.problem.dimension));
  problem.insert("final_time", c.problem.final_time);
  problem.insert("hamiltonian", toml::table{{"name", c.problem.hamiltonian.name},
                                            {"scale", c.problem.hamiltonian.scale},
                                            {"delta", c.problem.hamiltonian.delta}});
  problem.insert("potential",
                 toml::table{{"name", c.problem.potential.name}, {"amplitude", c.problem.potential.amplitude}});
  toml::table datum{{"name", c.problem.datum.name},
                    {"amplitude", c.problem.datum.amplitude},
                    {"frequency", static_cast<std::int64_t>(c.problem.datum.frequency)}};
  toml::array terms;
  for (const auto& term : c.problem.datum.terms) {
    terms.push_back(toml::table{
        {"amplitude", term.amplitude}, {"wavevector", to_array(term.wavevector)}, {"phase", term.phase}});
  }
  datum.insert("terms", terms);
  problem.insert("datum", datum);
  root.insert("problem", problem);

  toml::table scheme{{"kind", to_string(c.scheme.kind)},
                     {"numerical_hamiltonian", to_string(c.scheme.numerical_hamiltonian)},
                     {"alpha_inflation", c.scheme.alpha_inflation},
                     {"slope_inflation", c.scheme.slope_inflation},
                     {"enforce_cfl", c.scheme.enforce_cfl},
                     {"control_samples", static_cast<std::int64_t>(c.scheme.control_samples)},
                     {"polish", c.scheme.polish}};
  put_optional(scheme, "alpha", c.scheme.alpha, "auto");
  put_optional(scheme, "control_box", c.scheme.control_box, "auto");
  root.insert("scheme", scheme);

  root.insert("refinement", toml::table{{"grid_sizes", to_array(c.refinement.grid_sizes)},
                                        {"time_steps", to_array(c.refinement.time_steps)},
                                        {"coupling", to_string(c.refinement.coupling)},
                                        {"c", c.refinement.c}});

  toml::table oracle{{"kind", to_string(c.oracle.kind)},
                     {"reference_multiplier", static_cast<std::int64_t>(c.oracle.reference_multiplier)},
                     {"scan_samples", static_cast<std::int64_t>(c.oracle.scan_samples)},
                     {"cache_dir", c.oracle.cache_dir}};
  put_optional(oracle, "reference_dt", c.oracle.reference_dt, "coupled");
  root.insert("oracle", oracle);

  root.insert("outputs", toml::table{{"directory", c.outputs.directory},
                                     {"norms", to_array(c.outputs.norms)},
                                     {"snapshot_fractions", to_array(c.outputs.snapshot_fractions)}});

  toml::table acceptance{{"require_interpolation_check", c.acceptance.require_interpolation_check}};
  put_optional(acceptance, "l1_slope_min", c.acceptance.l1_slope_min, "none");
  put_optional(acceptance, "l1_slope_max", c.acceptance.l1_slope_max, "none");
  put_optional(acceptance, "r2_min", c.acceptance.r2_min, "none");
  put_optional(acceptance, "l2_slope_min", c.acceptance.l2_slope_min, "none");
  put_optional(acceptance, "l4_slope_min", c.acceptance.l4_slope_min, "none");
  put_optional(acceptance, "linf_slope_min", c.acceptance.linf_slope_min, "none");
  root.insert("acceptance", acceptance);

  root.insert("properties", toml::table{{"suite", to_array(c.properties.suite)},
                                        {"instances", static_cast<std::int64_t>(c.properties.instances)},
                                        {"pairs", static_cast<std::int64_t>(c.properties.pairs)},
                                        {"grid_size", static_cast<std::int64_t>(c.properties.grid_size)},
                                        {"dt_fraction", c.properties.dt_fraction},
                                        {"bypass_cfl", c.properties.bypass_cfl},
                                        {"final_time", c.properties.final_time},
                                        {"sl_time_steps", to_array(c.properties.sl_time_steps)},
                                        {"trials", static_cast<std::int64_t>(c.properties.trials)},
                                        {"dp_instances", static_cast<std::int64_t>(c.properties.dp_instances)}});

  root.insert("synthetic", toml::table{{"enabled", c.synthetic.enabled},
                                       {"constant", c.synthetic.constant},
                                       {"exponent", c.synthetic.exponent}});

  std::ostringstream os;
  os << root << '\n';
  return os.str();
}

void validate_config(const ExperimentConfig& c) {
  const auto& p = c.problem;
  if (p.dimension < 1 || p.dimension > kMaxDim) {
    throw ConfigError("problem.dimension must lie in [1, " + std::to_string(kMaxDim) + "]");
  }
  if (!(p.final_time >= 0.0) || !std::isfinite(p.final_time)) throw ConfigError("problem.final_time must be >= 0");
  if (p.hamiltonian.name == "quadratic") {
    if (!(p.hamiltonian.scale > 0.0)) throw ConfigError("problem.hamiltonian.scale must be > 0");
  } else if (p.hamiltonian.name == "smoothed_norm") {
    if (!(p.hamiltonian.delta > 0.0)) throw ConfigError("problem.hamiltonian.delta must be > 0");
  } else {
    throw ConfigError("problem.hamiltonian.name must be \"quadratic\" or \"smoothed_norm\"");
  }
  if (p.potential.name != "zero" && p.potential.name != "cosine") {
    throw ConfigError("problem.potential.name must be \"zero\" or \"cosine\"");
  }
  const std::string& g = p.datum.name;
  if (g != "cosine" && g != "constant" && g != "tent" && g != "trig_polynomial") {
    throw ConfigError("problem.datum.name must be one of: cosine, constant, tent, trig_polynomial");
  }
  if (g == "trig_polynomial") {
    if (p.datum.terms.empty()) throw ConfigError("problem.datum.terms must not be empty for trig_polynomial");
    for (const auto& t : p.datum.terms) {
      if (static_cast<int>(t.wavevector.size()) != p.dimension) {
        throw ConfigError("problem.datum.terms: each wavevector needs problem.dimension entries");
      }
    }
  }

  const auto& s = c.scheme;
  if (s.alpha && !(*s.alpha > 0.0)) throw ConfigError("scheme.alpha must be > 0 or \"auto\"");
  if (!(s.alpha_inflation >= 1.0)) throw ConfigError("scheme.alpha_inflation must be >= 1");
  if (!(s.slope_inflation >= 1.0)) throw ConfigError("scheme.slope_inflation must be >= 1");
  if (s.control_box && !(*s.control_box > 0.0)) throw ConfigError("scheme.control_box must be > 0 or \"auto\"");
  if (s.control_samples < 3) throw ConfigError("scheme.control_samples must be >= 3");
  if (s.kind == SchemeKind::fd && p.potential.name != "zero" && p.potential.amplitude != 0.0) {
    throw ConfigError("scheme.kind = \"fd\" solves the forward problem without a potential; use a zero potential");
  }
  if (s.kind == SchemeKind::fd && s.numerical_hamiltonian == FluxKind::separable_1d && p.dimension != 1) {
    throw ConfigError("scheme.numerical_hamiltonian = \"separable_1d\" requires problem.dimension = 1");
  }

  const auto& r = c.refinement;
  for (int n : r.grid_sizes) {
    if (n < 2) throw ConfigError("refinement.grid_sizes entries must be >= 2");
  }
  for (double dt : r.time_steps) {
    if (!(dt > 0.0)) throw ConfigError("refinement.time_steps entries must be > 0");
  }
  if (!(r.c > 0.0)) throw ConfigError("refinement.c must be > 0");
  if (s.kind == SchemeKind::sl && r.coupling == CouplingRule::cfl) {
    throw ConfigError("refinement.coupling = \"cfl\" applies to scheme.kind = \"fd\" only");
  }
  if (s.kind == SchemeKind::fd && r.coupling == CouplingRule::h_quadratic) {
    throw ConfigError("refinement.coupling = \"h_quadratic\" applies to scheme.kind = \"sl\" only");
  }
  if (r.coupling == CouplingRule::explicit_list && r.time_steps.size() != r.grid_sizes.size()) {
    throw ConfigError("refinement.coupling = \"explicit\" needs one time step per grid size");
  }
  if (r.grid_sizes.empty() && !(r.coupling == CouplingRule::h_quadratic && !r.time_steps.empty())) {
    throw ConfigError("refinement needs at least one level");
  }

  if (c.oracle.reference_multiplier < 8) throw ConfigError("oracle.reference_multiplier must be >= 8");
  if (c.oracle.reference_dt && !(*c.oracle.reference_dt > 0.0)) {
    throw ConfigError("oracle.reference_dt must be > 0 or \"coupled\"");
  }
  if (c.oracle.scan_samples < 64) throw ConfigError("oracle.scan_samples must be >= 64");
  if (c.oracle.kind == OracleKind::hopf_lax && p.potential.name != "zero" && p.potential.amplitude != 0.0) {
    throw ConfigError("oracle.kind = \"hopf_lax\" requires a zero potential");
  }

  for (const auto& n : c.outputs.norms) {
    if (n != "L1" && n != "L2" && n != "L4" && n != "Linf") {
      throw ConfigError("outputs.norms entries must be L1, L2, L4 or Linf");
    }
  }
  if (c.outputs.snapshot_fractions.empty()) throw ConfigError("outputs.snapshot_fractions must not be empty");
  for (double f : c.outputs.snapshot_fractions) {
    if (!(f >= 0.0 && f <= 1.0)) throw ConfigError("outputs.snapshot_fractions entries must lie in [0, 1]");
  }

  const auto& pr = c.properties;
  if (pr.instances < 0 || pr.pairs < 0 || pr.trials < 0 || pr.dp_instances < 0) {
    throw ConfigError("properties.instances, pairs, trials and dp_instances must be >= 0");
  }
  if (pr.grid_size < 2) throw ConfigError("properties.grid_size must be >= 2");
  if (!(pr.dt_fraction > 0.0)) throw ConfigError("properties.dt_fraction must be > 0");
  if (pr.dt_fraction > 1.0 && !pr.bypass_cfl) {
    throw ConfigError("properties.dt_fraction > 1 violates the CFL bound; set properties.bypass_cfl = true");
  }
  if (!(pr.final_time > 0.0)) throw ConfigError("properties.final_time must be > 0");
  for (double dt : pr.sl_time_steps) {
    if (!(dt > 0.0)) throw ConfigError("properties.sl_time_steps entries must be > 0");
  }
  if (c.synthetic.enabled && !(c.synthetic.constant > 0.0)) throw ConfigError("synthetic.constant must be > 0");
}

void validate_rate_config(const ExperimentConfig& c) {
  validate_config(c);
  const auto& r = c.refinement;
  const bool by_dt = c.scheme.kind == SchemeKind::sl && r.coupling == CouplingRule::h_quadratic && !r.time_steps.empty();
  const std::size_t levels = by_dt ? r.time_steps.size() : r.grid_sizes.size();
  if (levels < 3) {
    throw ConfigError(std::string("refinement.") + (by_dt ? "time_steps" : "grid_sizes") +
                      ": a rate study needs at least 3 refinement levels, got " + std::to_string(levels));
  }
}

Problem make_problem(const ExperimentConfig& c) {
  const auto& p = c.problem;
  Problem out;
  out.dim = p.dimension;
  out.final_time = p.final_time;
  out.hamiltonian = p.hamiltonian.name == "quadratic" ? quadratic_hamiltonian(p.hamiltonian.scale)
                                                      : smoothed_norm_hamiltonian(p.hamiltonian.delta);
  out.potential = cosine_potential(p.potential.name == "zero" ? 0.0 : p.potential.amplitude, p.dimension);
  const auto& g = p.datum;
  if (g.name == "cosine") {
    out.datum = cosine_datum(g.amplitude, g.frequency, p.dimension);
  } else if (g.name == "constant") {
    out.datum = constant_datum(g.amplitude, p.dimension);
  } else if (g.name == "tent") {
    out.datum = tent_datum(g.amplitude, p.dimension);
  } else {
    std::vector<TrigTerm> terms;
    for (const auto& t : g.terms) terms.push_back({t.amplitude, t.wavevector, t.phase});
    out.datum = trig_polynomial_datum(std::move(terms), p.dimension);
  }
  return out;
}

FdSettings fd_settings(const ExperimentConfig& c) {
  return {c.scheme.numerical_hamiltonian, c.scheme.alpha, c.scheme.alpha_inflation, c.scheme.slope_inflation,
          c.scheme.enforce_cfl};
}

SlSettings sl_settings(const ExperimentConfig& c) {
  return {c.scheme.control_box, c.scheme.control_samples, c.scheme.polish};
}

Coupling coupling(const ExperimentConfig& c) { return {c.refinement.coupling, c.refinement.c}; }

ExperimentConfig preset_config(const std::string& name) {
  ExperimentConfig c;
  if (name == "fd_rates") {
    c.refinement.grid_sizes = {64, 128, 256, 512, 1024};
    c.outputs.directory = "out/fd_rates";
    c.outputs.snapshot_fractions = {0.25, 0.5, 1.0};
    c.acceptance.l1_slope_min = 0.85;
    c.acceptance.l1_slope_max = 1.6;
    c.acceptance.r2_min = 0.98;
    c.acceptance.linf_slope_min = 0.45;
    c.acceptance.l2_slope_min = 0.70;
    c.acceptance.l4_slope_min = 0.57;
  } else if (name == "sl_rates") {
    c.problem.potential = {"cosine", 1.0};
    c.scheme.kind = SchemeKind::sl;
    c.refinement.grid_sizes = {};
    c.refinement.time_steps = {0.1, 0.05, 0.025, 0.0125};
    c.refinement.coupling = CouplingRule::h_quadratic;
    c.refinement.c = 1.0;
    c.oracle.cache_dir = "out/reference_cache";
    c.outputs.directory = "out/sl_rates";
    c.outputs.snapshot_fractions = {0.2, 0.6, 1.0};
    c.acceptance.l1_slope_min = 0.85;
    c.acceptance.l1_slope_max = 1.7;
    c.acceptance.r2_min = 0.97;
    c.acceptance.l2_slope_min = 0.70;
  } else if (name == "fd_properties") {
    c.outputs.directory = "out/fd_properties";
    c.properties.grid_size = 32;
  } else if (name == "sl_properties") {
    c.problem.potential = {"cosine", 1.0};
    c.scheme.kind = SchemeKind::sl;
    c.scheme.control_samples = 101;
    c.refinement.grid_sizes = {};
    c.refinement.time_steps = {0.1, 0.05, 0.025};
    c.refinement.coupling = CouplingRule::h_quadratic;
    c.refinement.c = 1.0;
    c.outputs.directory = "out/sl_properties";
    c.properties.instances = 100;
    c.properties.pairs = 100;
    c.properties.grid_size = 16;
  } else if (name == "minimal") {
    c.problem.final_time = 0.0;
    c.refinement.grid_sizes = {16};
    c.outputs.directory = "out/minimal";
    c.outputs.snapshot_fractions = {1.0};
  } else {
    throw ConfigError("unknown preset '" + name + "'");
  }
  validate_config(c);
  return c;
}

std::vector<std::string> preset_names() { return {"fd_rates", "sl_rates", "fd_properties", "sl_properties", "minimal"}; }

const char* to_string(OracleKind k) {
  switch (k) {
    case OracleKind::automatic:
      return "auto";
    case OracleKind::hopf_lax:
      return "hopf_lax";
    case OracleKind::reference:
      return "reference";
    case OracleKind::none:
      return "none";
  }
  return "?";
}

}  // namespace hjt
