#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <span>
#include <string>
#include <vector>

#include "hjtorus/analysis.hpp"
#include "hjtorus/config.hpp"
#include "hjtorus/oracle.hpp"

namespace hjt {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // invariant, precondition or acceptance failure
inline constexpr int kExitConfig = 2;

struct RateStudy {
  ErrorReport report;
  Provenance oracle;
  bool synthetic = false;
  // Lp <= L1^{1/p} Linf^{1-1/p} for p = 2, 4 on every (level, snapshot).
  int interpolation_checks = 0;
  std::vector<std::string> interpolation_failures;
};

// Solves every refinement level, compares with the oracle at the snapshot
// times and keeps the sup over snapshots per norm. eps = h + dt (FD) or
// dt + h / dt (SL). Levels run coarse to fine.
RateStudy rate_study(const ExperimentConfig& config, std::ostream* log = nullptr);

struct Check {
  std::string name;
  bool passed = false;
  std::string detail;
};

// Threshold checks of [acceptance] against a study, one per configured bound.
std::vector<Check> rate_checks(const ExperimentConfig& config, const RateStudy& study);

struct PropertyResult {
  std::string name;
  bool passed = false;
  double worst_margin = 0.0;  // slack of the inequality; negative means violated
  std::string detail;
};

// Property names per scheme; "all" in the suite selects every one.
std::vector<std::string> fd_property_names();
std::vector<std::string> sl_property_names();

std::vector<PropertyResult> fd_property_suite(const ExperimentConfig& config, std::uint64_t seed);
std::vector<PropertyResult> sl_property_suite(const ExperimentConfig& config, std::uint64_t seed);

// "name,passed,worst_margin,detail"
void write_property_report_csv(std::ostream& os, std::span<const PropertyResult> results);

// Random trigonometric polynomial with 1 to 3 terms, wavevector entries in
// [-2, 2] and Lipschitz bound scaled to lip_target.
InitialDatumPtr random_trig_datum(std::mt19937_64& rng, int dim, double lip_target);

// Subcommands. Artifacts go to config.outputs.directory; progress to log.
int run_solve(const ExperimentConfig& config, std::ostream& log);
int run_rates(const ExperimentConfig& config, std::ostream& log);
int run_properties(const ExperimentConfig& config, std::uint64_t seed, std::ostream& log);

}  // namespace hjt
