// Command-line front end: parse arguments, dispatch to the experiment runner.
//
// Usage:
//   stohom <command> --config <file> [--seed-override N] [--threads K] [--out DIR]
//
// Commands: homogenize, law, resonance, converge, sample-field run an
// experiment; validate only checks a config and prints every diagnostic.
// Exit status: 0 success, 1 validation error, 2 numerical failure.

#include <cstdint>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "stohom/config.hpp"
#include "stohom/runner.hpp"
#include "stohom/version.hpp"

int main(int argc, char** argv) {
  CLI::App app{"stohom: numerical toolkit for stochastic homogenization of "
               "non-ergodic stationary coefficient fields"};
  app.set_version_flag("--version", std::string(stohom::kVersionString));

  std::string command;
  std::string config_path;
  std::uint64_t seed_override = 0;
  int threads = 0;
  std::string out_dir;

  app.add_option("command", command, "one of: homogenize, law, resonance, converge, "
                                     "sample-field, validate")
      ->required()
      ->check(CLI::IsMember(
          {"homogenize", "law", "resonance", "converge", "sample-field", "validate"}));
  app.add_option("--config", config_path, "experiment configuration file (JSON, schema = 1)")
      ->required();
  auto* seed_opt = app.add_option("--seed-override", seed_override,
                                  "replace the config's master_seed for this run");
  auto* threads_opt = app.add_option("--threads", threads,
                                     "worker threads (else the STOHOM_THREADS environment "
                                     "variable, else 1)");
  auto* out_opt = app.add_option("--out", out_dir, "replace the config's output_dir");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (command == "validate") {
    nlohmann::json raw;
    try {
      raw = stohom::load_config_file(config_path);
    } catch (const std::exception& e) {
      std::cerr << "validation error: " << e.what() << "\n";
      return 1;
    }
    const std::vector<stohom::Diagnostic> diags = stohom::validate_config(raw);
    for (const auto& d : diags) std::cout << d.format() << "\n";
    if (diags.empty()) std::cout << "configuration ok\n";
    return diags.empty() ? 0 : 1;
  }

  stohom::RunOptions opt;
  opt.config_path = config_path;
  opt.expected_command = command;
  if (seed_opt->count() > 0) opt.seed_override = seed_override;
  if (threads_opt->count() > 0) opt.threads = threads;
  if (out_opt->count() > 0) opt.output_dir = out_dir;
  return stohom::run_experiment(opt);
}
