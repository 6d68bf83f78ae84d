#pragma once

#include "config.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace copar::cli {

enum ExitCode : int { exit_ok = 0, exit_validation = 1, exit_guard = 2, exit_solver = 3 };

/// One subcommand call with its global flags.
struct Invocation {
  std::string command;
  std::vector<std::filesystem::path> configs;
  std::uint64_t seed = 0;
  bool override_tau_guard = false;
  std::optional<std::filesystem::path> out;
};

const std::vector<std::string>& command_names();

/// Runs a subcommand, writes its files and summary record, and returns the exit code.
int run_command(const Invocation& inv, std::ostream& out, std::ostream& err);

}  // namespace copar::cli
