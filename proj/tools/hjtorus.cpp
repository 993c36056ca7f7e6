#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "hjtorus/config.hpp"
#include "hjtorus/experiment.hpp"
#include "hjtorus/parallel.hpp"

namespace {

hjt::ExperimentConfig resolve(const std::string& path, const std::string& preset, const std::string& out) {
  if (!path.empty() && !preset.empty()) throw hjt::ConfigError("--config and --preset are mutually exclusive");
  hjt::ExperimentConfig c = !path.empty()     ? hjt::load_config(path)
                            : !preset.empty() ? hjt::preset_config(preset)
                                              : hjt::ExperimentConfig{};
  if (!out.empty()) c.outputs.directory = out;
  hjt::validate_config(c);
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Finite-difference and semi-Lagrangian solvers for Hamilton-Jacobi equations on the flat torus"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset;
  std::string out;
  int threads = 1;
  std::uint64_t seed = 1;
  app.add_option("--config", config_path, "TOML experiment configuration");
  app.add_option("--preset", preset, "built-in configuration instead of --config")
      ->check(CLI::IsMember(hjt::preset_names()));
  app.add_option("--out", out, "output directory (overrides outputs.directory)");
  app.add_option("--threads", threads, "worker threads")->check(CLI::Range(1, 1024));
  app.add_option("--seed", seed, "seed for randomized property trials");

  auto* solve = app.add_subcommand("solve", "solve the finest configured level and write snapshots");
  auto* rates = app.add_subcommand("rates", "refinement study against the oracle with rate fits");
  auto* properties = app.add_subcommand("properties", "run the invariant suite of the configured scheme");
  auto* print = app.add_subcommand("print-config", "print the full effective configuration");
  for (auto* sub : {solve, rates, properties, print}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : hjt::kExitConfig;
  }

  try {
    const hjt::ExperimentConfig config = resolve(config_path, preset, out);
    hjt::set_thread_count(threads);
    if (print->parsed()) {
      std::cout << hjt::serialize_config(config);
      return hjt::kExitOk;
    }
    if (solve->parsed()) return hjt::run_solve(config, std::cout);
    if (rates->parsed()) return hjt::run_rates(config, std::cout);
    return hjt::run_properties(config, seed, std::cout);
  } catch (const hjt::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return hjt::kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return hjt::kExitFailure;
  }
}
