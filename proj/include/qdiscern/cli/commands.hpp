// commands.hpp
// Subcommands of the qdiscern tool. Each returns the full-precision table,
// a human-readable summary and command-specific metadata.

#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "qdiscern/cli/config.hpp"
#include "qdiscern/cli/report.hpp"

namespace qdiscern::cli {

// Process exit statuses.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitInfeasible = 3;

struct CommandResult {
  CsvTable table;
  std::string summary;
  nlohmann::json meta = nlohmann::json::object();
};

CommandResult cmd_sudden(const ExperimentConfig& config, unsigned threads);
CommandResult cmd_fisher(const ExperimentConfig& config, unsigned threads);
CommandResult cmd_power(const ExperimentConfig& config, unsigned threads);
CommandResult cmd_stein(const ExperimentConfig& config, unsigned threads);
CommandResult cmd_condition(const ExperimentConfig& config, unsigned threads);
CommandResult cmd_anomaly(const ExperimentConfig& config, unsigned threads);

const std::vector<std::string>& command_names();

CommandResult run_command(const std::string& name, const ExperimentConfig& config, unsigned threads);

// Full command-line entry point; args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace qdiscern::cli
