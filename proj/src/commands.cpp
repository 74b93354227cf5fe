#include "advot/commands.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace advot {

namespace {

using ordered = nlohmann::ordered_json;

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path.string());
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path.string());
}

ordered plan_json(const BipartiteNetwork& net, const TransportPlan& plan) {
  ordered out = ordered::array();
  for (std::size_t e = 0; e < net.num_edges(); ++e) {
    out.push_back({{"source", net.source_id(net.edge(e).source)},
                   {"target", net.target_id(net.edge(e).target)},
                   {"rate", plan.rates[e]}});
  }
  return out;
}

ordered prices_json(const BipartiteNetwork& net, const DualPrices& prices) {
  ordered out = ordered::object();
  for (std::size_t j = 0; j < net.num_sources(); ++j) out[net.source_id(j)] = prices.values[j];
  return out;
}

ordered strategy_json(const BipartiteNetwork& net, const AdversaryStrategy& s) {
  ordered out = ordered::object();
  for (std::size_t q = 0; q < net.num_targets(); ++q) {
    out[net.target_id(q)] = {{"xi1", s.minor[q]}, {"xi2", s.major[q]}};
  }
  return out;
}

ordered belief_json(const BipartiteNetwork& net, const BeliefState& b) {
  ordered out = ordered::object();
  for (std::size_t q = 0; q < net.num_targets(); ++q) {
    out[net.target_id(q)] = {{"mu1", b.prob(q, OffenderType::Minor)},
                             {"mu2", b.prob(q, OffenderType::Major)}};
  }
  return out;
}

double slack_min(const BipartiteNetwork& net, const TransportPlan& plan) {
  const auto report = feasibility_check(plan, net, 0.0);
  double m = report.slack.empty() ? 0.0 : report.slack.front();
  for (double s : report.slack) m = std::min(m, s);
  return m;
}

struct Outcome {
  bool converged = true;
  std::string summary;
  ordered report;
  Trace trace;
  std::optional<MessageLog> log;
};

Outcome solve_ot(const ScenarioConfig& config) {
  const BipartiteNetwork net = network_of(config);
  const PerceptionWeights w = weights_of(config, net);
  SolverSettings settings = settings_of(config);
  validate_settings(settings, true);
  Outcome out;
  out.report["command"] = "solve-ot";
  if (settings.lambda == 0.0) {
    const TransportPlan plan = unregularized_solve(net, w);
    out.report["solver"] = "unregularized";
    out.report["converged"] = true;
    out.report["plan"] = plan_json(net, plan);
    out.report["objective"] = planner_objective(plan, w, 0.0);
    out.report["min_slack"] = slack_min(net, plan);
    out.trace = solve_trace(net, {});
    out.summary = "unregularized plan computed";
    return out;
  }
  settings.record_trace = true;
  const SolveReport r = solve_regularized_ot(net, w, settings);
  out.converged = r.converged;
  out.report["solver"] = "regularized";
  out.report["converged"] = r.converged;
  out.report["iterations"] = r.iterations;
  out.report["residual"] = r.residual;
  out.report["plan"] = plan_json(net, r.plan);
  out.report["prices"] = prices_json(net, r.prices);
  out.report["objective"] = planner_objective(r.plan, w, settings.lambda);
  out.report["complementarity_residual"] = complementarity_residual(net, r.plan, r.prices);
  out.report["min_slack"] = slack_min(net, r.plan);
  out.trace = solve_trace(net, r);
  out.summary = (r.converged ? "converged" : "not converged") + std::string(" after ") +
                std::to_string(r.iterations) + " iterations";
  return out;
}

Outcome static_eq(const ScenarioConfig& config) {
  const GameSpec game = game_of(config);
  const EquilibriumProfile p = solve_bayesian_equilibrium(game, equilibrium_options_of(config));
  const auto& net = game.network;
  Outcome out;
  out.converged = p.converged;
  out.report["command"] = "static-eq";
  out.report["converged"] = p.converged;
  out.report["rounds"] = p.rounds;
  out.report["rounds_converged"] = p.rounds_converged;
  out.report["last_change"] = p.last_change;
  out.report["deviation"] = {{"gap", p.deviation.gap},
                             {"dispatcher_gap", p.deviation.dispatcher_gap},
                             {"adversary_gap", p.deviation.adversary_gap}};
  out.report["plan"] = plan_json(net, p.plan);
  out.report["prices"] = prices_json(net, p.prices);
  out.report["strategy"] = strategy_json(net, p.strategy);
  out.report["dispatcher_expected_utility"] = dispatcher_expected_utility(
      net, p.plan, game.weights, p.strategy, game.belief, game.settings.lambda);
  out.report["realized_utility"] = realized_utility(p.plan, game.weights, game.settings.lambda);
  if (!p.trace.empty()) {
    out.report["adversary_cost_type1"] = p.trace.back().adversary_cost_minor;
    out.report["adversary_cost_type2"] = p.trace.back().adversary_cost_major;
  }
  out.trace = equilibrium_trace(net, p.trace);
  out.summary = (p.converged ? "equilibrium after " : "no certified equilibrium after ") +
                std::to_string(p.rounds) + " rounds, deviation gap " +
                format_number(p.deviation.gap);
  return out;
}

Outcome dynamic_sim(const ScenarioConfig& config) {
  const GameSpec game = game_of(config);
  const DynamicRun run = run_dynamic_game(game, dynamic_options_of(config));
  const auto& net = game.network;
  Outcome out;
  out.converged = run.converged;
  out.report["command"] = "dynamic-sim";
  out.report["converged"] = run.converged;
  out.report["first_failed_stage"] =
      run.first_failed_stage ? ordered(*run.first_failed_stage) : ordered(nullptr);
  ordered stages = ordered::array();
  for (const StageState& s : run.stages) {
    stages.push_back({{"stage", s.stage},
                      {"converged", s.profile.converged},
                      {"rounds", s.profile.rounds},
                      {"belief", belief_json(net, s.belief)},
                      {"action", strategy_json(net, s.profile.strategy)},
                      {"effective", strategy_json(net, s.effective)},
                      {"plan", plan_json(net, s.profile.plan)},
                      {"dispatcher_utility", s.dispatcher_utility},
                      {"adversary_cost_type1", s.adversary_cost_minor},
                      {"adversary_cost_type2", s.adversary_cost_major}});
  }
  out.report["stages"] = std::move(stages);
  out.report["final_belief"] = belief_json(net, run.final_belief);
  out.trace = dynamic_trace(net, run);
  out.summary = std::to_string(run.stages.size()) + " stages, " +
                (run.converged ? "all converged"
                               : "stage " + std::to_string(*run.first_failed_stage) + " failed");
  return out;
}

Outcome distributed_sim(const ScenarioConfig& config) {
  const Schedule schedule = schedule_of(config);
  DistributedRun run;
  BipartiteNetwork net;
  if (config.adversary) {
    const GameSpec game = game_of(config);
    run = run_distributed(game, schedule);
    net = game.network;
  } else {
    net = network_of(config);
    run = run_distributed(net, weights_of(config, net), settings_of(config), schedule);
  }
  Outcome out;
  out.converged = run.report.converged;
  out.report["command"] = "distributed-sim";
  out.report["schedule"] = to_string(schedule.mode);
  out.report["seed"] = schedule.seed;
  out.report["converged"] = run.report.converged;
  out.report["ticks"] = run.report.iterations;
  out.report["residual"] = run.report.residual;
  out.report["plan"] = plan_json(net, run.report.plan);
  out.report["prices"] = prices_json(net, run.report.prices);
  if (run.strategy) out.report["strategy"] = strategy_json(net, *run.strategy);
  out.report["messages"] = run.log.size();
  out.trace = distributed_trace(net, run);
  out.log = std::move(run.log);
  out.summary = (run.report.converged ? "converged after " : "not converged after ") +
                std::to_string(run.report.iterations) + " ticks";
  return out;
}

}  // namespace

std::string_view to_string(Command command) {
  switch (command) {
    case Command::SolveOt: return "solve-ot";
    case Command::StaticEq: return "static-eq";
    case Command::DynamicSim: return "dynamic-sim";
    case Command::DistributedSim: return "distributed-sim";
  }
  return "unknown";
}

std::optional<Command> parse_command(std::string_view text) {
  for (Command c : {Command::SolveOt, Command::StaticEq, Command::DynamicSim,
                    Command::DistributedSim}) {
    if (text == to_string(c)) return c;
  }
  return std::nullopt;
}

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::NotConverged:
    case ErrorCode::StageNotConverged:
      return kExitNotConverged;
    case ErrorCode::EmptyInput:
    case ErrorCode::DuplicateNode:
    case ErrorCode::DuplicateEdge:
    case ErrorCode::DanglingEdge:
    case ErrorCode::NonpositiveCapacity:
    case ErrorCode::IsolatedNode:
    case ErrorCode::DimensionMismatch:
    case ErrorCode::InvalidBelief:
    case ErrorCode::InvalidBounds:
    case ErrorCode::InvalidParameter:
    case ErrorCode::PerturbationBelowFloor:
    case ErrorCode::ZeroLambda:
    case ErrorCode::DegenerateDenominator:
    case ErrorCode::ParseError:
    case ErrorCode::ValidationError:
    case ErrorCode::CorruptLog:
    case ErrorCode::IoError:
      return kExitInputError;
  }
  return kExitInputError;
}

void apply_overrides(ScenarioConfig& config, const Overrides& o) {
  if (o.lambda) config.solver.lambda = *o.lambda;
  if (o.gamma) config.solver.gamma = *o.gamma;
  if (o.tol) config.solver.tol = *o.tol;
  if (o.stages) config.dynamic.stages = *o.stages;
  if (o.tau) config.dynamic.tau = *o.tau;
  if (o.schedule) config.distributed.schedule = *o.schedule;
  if (o.seed) config.distributed.seed = *o.seed;
  validate_scenario(config);
}

CommandResult run_command(Command command, const ScenarioConfig& config,
                          const std::string& out_dir, TraceFormat format) {
  CommandResult result;
  try {
    const std::filesystem::path dir(out_dir);
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw Error(ErrorCode::IoError, "cannot create " + out_dir + ": " + ec.message());

    write_text(dir / "config.json", echo_scenario(config));
    result.files.push_back((dir / "config.json").string());

    Outcome out;
    switch (command) {
      case Command::SolveOt: out = solve_ot(config); break;
      case Command::StaticEq: out = static_eq(config); break;
      case Command::DynamicSim: out = dynamic_sim(config); break;
      case Command::DistributedSim: out = distributed_sim(config); break;
    }

    const auto trace_path =
        dir / (format == TraceFormat::Csv ? "trace.csv" : "trace.jsonl");
    emit_trace(out.trace, format, trace_path.string());
    result.files.push_back(trace_path.string());
    write_text(dir / "report.json", out.report.dump(2) + "\n");
    result.files.push_back((dir / "report.json").string());
    if (out.log) {
      write_text(dir / "messages.jsonl", out.log->to_string());
      result.files.push_back((dir / "messages.jsonl").string());
    }
    result.exit_code = out.converged ? kExitConverged : kExitNotConverged;
    result.message = std::string(to_string(command)) + ": " + out.summary;
  } catch (const Error& e) {
    result.exit_code = exit_code_for(e.code());
    result.message = e.what();
  }
  return result;
}

CommandResult run_command(const CommandRequest& request) {
  try {
    ScenarioConfig config = load_scenario(request.config_path);
    apply_overrides(config, request.overrides);
    return run_command(request.command, config, request.out_dir, request.format);
  } catch (const Error& e) {
    return {exit_code_for(e.code()), e.what(), {}};
  }
}

}  // namespace advot
