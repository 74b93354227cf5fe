#pragma once

// The four experiment entry points behind the command line tool. Each run
// writes into the output directory:
//
//   config.json                 effective configuration (after overrides)
//   trace.csv | trace.jsonl     per-iteration / round / stage / tick rows
//   report.json                 final state and diagnostics
//   messages.jsonl              message log (distributed-sim only)

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "advot/error.hpp"
#include "advot/scenario.hpp"
#include "advot/trace.hpp"

namespace advot {

enum class Command { SolveOt, StaticEq, DynamicSim, DistributedSim };

inline constexpr int kExitConverged = 0;
inline constexpr int kExitInputError = 1;
inline constexpr int kExitNotConverged = 2;

std::string_view to_string(Command command);
std::optional<Command> parse_command(std::string_view text);

// NotConverged and StageNotConverged map to 2, every other code to 1.
int exit_code_for(ErrorCode code);

struct Overrides {
  std::optional<double> lambda;
  std::optional<double> gamma;
  std::optional<double> tol;
  std::optional<int> stages;
  std::optional<double> tau;
  std::optional<std::string> schedule;
  std::optional<std::uint64_t> seed;
};

// Applies the overrides and revalidates. Throws ValidationError.
void apply_overrides(ScenarioConfig& config, const Overrides& overrides);

struct CommandResult {
  int exit_code = kExitConverged;
  std::string message;              // one-line summary or error text
  std::vector<std::string> files;   // written, in order
};

// Runs on an already validated config. Module errors are caught and mapped to
// exit codes; nothing is thrown.
CommandResult run_command(Command command, const ScenarioConfig& config,
                          const std::string& out_dir, TraceFormat format);

struct CommandRequest {
  Command command = Command::SolveOt;
  std::string config_path;
  std::string out_dir;
  Overrides overrides;
  TraceFormat format = TraceFormat::Csv;
};

// Loads, overrides, validates and runs.
CommandResult run_command(const CommandRequest& request);

}  // namespace advot
