// advot <solve-ot|static-eq|dynamic-sim|distributed-sim> --config PATH --out DIR [options]
//
// ADVOT_LOG sets the log level (trace, debug, info, warn, error, off; default info).

#include <cstdlib>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "advot/commands.hpp"

namespace {

void setup_logging() {
  auto logger = spdlog::stderr_color_mt("advot");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::info);
  if (const char* env = std::getenv("ADVOT_LOG")) {
    const auto level = spdlog::level::from_str(env);
    // from_str maps unknown names to off; only accept it when asked for.
    if (level != spdlog::level::off || std::string(env) == "off") {
      spdlog::set_level(level);
    } else {
      spdlog::warn("ignoring unknown ADVOT_LOG level '{}'", env);
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();

  CLI::App app{"Adversarial regularized transport: solvers and simulations"};
  app.require_subcommand(1);

  advot::CommandRequest request;
  std::string emit = "csv";
  std::optional<double> lambda, gamma, tol, tau;
  std::optional<int> stages;
  std::optional<std::string> schedule;
  std::optional<std::uint64_t> seed;

  const std::pair<advot::Command, const char*> commands[] = {
      {advot::Command::SolveOt, "Regularized transport plan for the scenario weights"},
      {advot::Command::StaticEq, "Bayesian equilibrium by alternating best response"},
      {advot::Command::DynamicSim, "Multistage game with thresholding and belief updates"},
      {advot::Command::DistributedSim, "Agent-based asynchronous dual pricing"},
  };
  std::vector<std::pair<CLI::App*, advot::Command>> subs;
  for (const auto& [command, help] : commands) {
    CLI::App* sub = app.add_subcommand(std::string(advot::to_string(command)), help);
    sub->add_option("--config", request.config_path, "Scenario file (JSON)")
        ->required()
        ->check(CLI::ExistingFile);
    sub->add_option("--out", request.out_dir, "Output directory")->required();
    sub->add_option("--lambda", lambda, "Regularization weight (0 for the unregularized plan)");
    sub->add_option("--gamma", gamma, "Dual step size");
    sub->add_option("--tol", tol, "Solver tolerance");
    sub->add_option("--stages", stages, "Number of stages (dynamic-sim)");
    sub->add_option("--tau", tau, "Threshold (dynamic-sim)");
    sub->add_option("--schedule", schedule, "Agent schedule (distributed-sim)")
        ->check(CLI::IsMember({"sync", "async", "roundrobin"}));
    sub->add_option("--seed", seed, "Scheduler seed (distributed-sim)");
    sub->add_option("--emit", emit, "Trace format")->check(CLI::IsMember({"csv", "json"}));
    subs.emplace_back(sub, command);
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : advot::kExitInputError;
  }

  for (const auto& [sub, command] : subs) {
    if (sub->parsed()) request.command = command;
  }
  request.overrides = {lambda, gamma, tol, stages, tau, schedule, seed};
  request.format = emit == "json" ? advot::TraceFormat::JsonLines : advot::TraceFormat::Csv;

  spdlog::debug("config {} -> {}", request.config_path, request.out_dir);
  const advot::CommandResult result = advot::run_command(request);
  for (const std::string& f : result.files) spdlog::debug("wrote {}", f);
  switch (result.exit_code) {
    case advot::kExitConverged: spdlog::info("{}", result.message); break;
    case advot::kExitNotConverged: spdlog::warn("{}", result.message); break;
    default: spdlog::error("{}", result.message); break;
  }
  return result.exit_code;
}
