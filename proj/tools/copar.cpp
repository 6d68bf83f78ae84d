#include "cli/commands.hpp"

#include <CLI11.hpp>

#include <iostream>

int main(int argc, char** argv) {
  using namespace copar::cli;
  CLI::App app{"Solver and estimate checks for the coupled linear parabolic system"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  Invocation inv;
  std::vector<std::string> configs;
  std::string out;
  app.add_option("--config", configs, "Run configuration (repeat for depcheck)")->check(CLI::ExistingFile);
  app.add_option("--seed", inv.seed, "Seed for randomized catalog expressions")->default_val(0);
  app.add_flag("--override-tau-guard", inv.override_tau_guard, "Run steps with tau >= tau_*");
  app.add_option("--out", out, "Output directory");

  const std::pair<const char*, const char*> commands[] = {
      {"validate", "Check admissibility of the coefficient sextet"},
      {"run", "March the scheme and write trajectory files"},
      {"converge", "Step-size refinement study over the taus list"},
      {"depcheck", "Continuous-dependence estimate for two configurations"},
      {"kwc-build", "Build and export linearized or adjoint phase-field coefficients"},
      {"constants", "Print tau_*, C*, M0, M1, C1* and embedding constants"}};
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_validation;
  }
  inv.command = app.get_subcommands().front()->get_name();
  for (const auto& c : configs) inv.configs.emplace_back(c);
  if (!out.empty()) inv.out = out;
  return run_command(inv, std::cout, std::cerr);
}
