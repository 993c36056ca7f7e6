#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hjtorus/problem.hpp"

namespace hjt {

struct HamiltonianSpec {
  std::string name = "quadratic";  // quadratic | smoothed_norm
  double scale = 1.0;  // quadratic
  double delta = 0.1;  // smoothed_norm
  bool operator==(const HamiltonianSpec&) const = default;
};

struct PotentialSpec {
  std::string name = "zero";  // zero | cosine
  double amplitude = 0.0;
  bool operator==(const PotentialSpec&) const = default;
};

struct TrigTermSpec {
  double amplitude = 0.0;
  std::vector<int> wavevector;
  double phase = 0.0;
  bool operator==(const TrigTermSpec&) const = default;
};

struct DatumSpec {
  std::string name = "cosine";  // cosine | constant | tent | trig_polynomial
  double amplitude = 1.0;  // cosine amplitude, constant value, tent height
  int frequency = 1;
  std::vector<TrigTermSpec> terms;
  bool operator==(const DatumSpec&) const = default;
};

struct ProblemSection {
  int dimension = 1;
  double final_time = 0.5;
  HamiltonianSpec hamiltonian;
  PotentialSpec potential;
  DatumSpec datum;
  bool operator==(const ProblemSection&) const = default;
};

struct SchemeSection {
  SchemeKind kind = SchemeKind::fd;
  FluxKind numerical_hamiltonian = FluxKind::lax_friedrichs;
  std::optional<double> alpha;  // "auto" when empty
  double alpha_inflation = 1.1;
  double slope_inflation = 1.05;
  bool enforce_cfl = true;
  std::optional<double> control_box;  // "auto" when empty
  int control_samples = 201;
  bool polish = true;
  bool operator==(const SchemeSection&) const = default;
};

struct RefinementSection {
  std::vector<int> grid_sizes{64, 128, 256};
  std::vector<double> time_steps;  // SL levels under h = c dt^2, or explicit (I, dt) pairs
  CouplingRule coupling = CouplingRule::cfl;
  double c = 0.9;
  bool operator==(const RefinementSection&) const = default;
};

enum class OracleKind { automatic, hopf_lax, reference, none };

struct OracleSection {
  OracleKind kind = OracleKind::automatic;
  int reference_multiplier = 8;
  std::optional<double> reference_dt;  // "coupled" when empty
  int scan_samples = 4096;  // Hopf-Lax samples per unit length
  std::string cache_dir;
  bool operator==(const OracleSection&) const = default;
};

struct OutputsSection {
  std::string directory = "out";
  std::vector<std::string> norms{"L1", "L2", "L4", "Linf"};
  std::vector<double> snapshot_fractions{0.25, 0.5, 1.0};
  bool operator==(const OutputsSection&) const = default;
};

// Rate thresholds; absent entries are not checked.
struct AcceptanceSection {
  std::optional<double> l1_slope_min;
  std::optional<double> l1_slope_max;
  std::optional<double> r2_min;
  std::optional<double> l2_slope_min;
  std::optional<double> l4_slope_min;
  std::optional<double> linf_slope_min;
  bool require_interpolation_check = true;
  bool operator==(const AcceptanceSection&) const = default;
};

struct PropertiesSection {
  std::vector<std::string> suite{"all"};
  int instances = 200;
  int pairs = 200;
  int grid_size = 32;
  double dt_fraction = 0.9;  // of dt_max (FD)
  bool bypass_cfl = false;  // test mode: let dt exceed dt_max
  double final_time = 0.25;
  std::vector<double> sl_time_steps{0.1, 0.05, 0.025};
  int trials = 10000;  // verify_monotone_update trials
  int dp_instances = 50;  // SL vs exhaustive DP comparisons
  bool operator==(const PropertiesSection&) const = default;
};

// Test mode: replaces solver errors with error = constant * eps^exponent.
struct SyntheticSection {
  bool enabled = false;
  double constant = 1.0;
  double exponent = 1.0;
  bool operator==(const SyntheticSection&) const = default;
};

struct ExperimentConfig {
  ProblemSection problem;
  SchemeSection scheme;
  RefinementSection refinement;
  OracleSection oracle;
  OutputsSection outputs;
  AcceptanceSection acceptance;
  PropertiesSection properties;
  SyntheticSection synthetic;
  bool operator==(const ExperimentConfig&) const = default;
};

// Throws ConfigError with the offending key on malformed or inconsistent input.
ExperimentConfig parse_config(const std::string& toml_text);
ExperimentConfig load_config(const std::string& path);
// Full effective configuration, every default spelled out.
std::string serialize_config(const ExperimentConfig& config);

// Structural checks shared by every subcommand (dimension, positive sizes,
// coupling consistent with the scheme, fractions in [0, 1]).
void validate_config(const ExperimentConfig& config);
// Additional checks for rate studies: at least 3 refinement levels.
void validate_rate_config(const ExperimentConfig& config);

Problem make_problem(const ExperimentConfig& config);
FdSettings fd_settings(const ExperimentConfig& config);
SlSettings sl_settings(const ExperimentConfig& config);
Coupling coupling(const ExperimentConfig& config);

// Named presets: "fd_rates", "sl_rates", "fd_properties", "sl_properties", "minimal".
ExperimentConfig preset_config(const std::string& name);
std::vector<std::string> preset_names();

const char* to_string(OracleKind k);

}  // namespace hjt
