#pragma once

// Scenario files: one JSON document describing the network, the adversary and
// the solver knobs. Defaults are filled on load, so a parsed config is always
// complete and echo_scenario() writes every effective value back out.
//
// {
//   "network": {"sources": [...], "targets": [...], "capacities": [...],
//               "edges": [{"source": s, "target": t, "weight": m, "punishment": k?}]},
//   "adversary": {"minor_caps": [...], "major_caps": [...], "punishment": [...]?,
//                 "beta1": 0.5, "beta2": 0.5, "prior": [[p1, p2], ...]?},
//   "solver": {"lambda", "gamma", "tol", "max_iter", "max_rounds", "eq_tol",
//              "deviation_eps", "parallel"},
//   "dynamic": {"stages", "tau", "abort_on_stage_failure"},
//   "distributed": {"schedule", "activation", "seed", "max_ticks", "adversary_period"}
// }
//
// Edge punishment, when given, overrides the per-target adversary.punishment.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "advot/bayes_dynamic.hpp"
#include "advot/distributed.hpp"

namespace advot {

struct ScenarioEdge {
  std::string source;
  std::string target;
  double weight = 0.0;
  std::optional<double> punishment;
  friend bool operator==(const ScenarioEdge&, const ScenarioEdge&) = default;
};

struct NetworkBlock {
  std::vector<std::string> sources;
  std::vector<std::string> targets;
  std::vector<double> capacities;
  std::vector<ScenarioEdge> edges;
  friend bool operator==(const NetworkBlock&, const NetworkBlock&) = default;
};

struct AdversaryBlock {
  std::vector<double> minor_caps;
  std::vector<double> major_caps;
  std::optional<std::vector<double>> punishment;  // per target
  double beta1 = 0.5;
  double beta2 = 0.5;
  std::vector<std::array<double, 2>> prior;  // uniform when absent from the file
  friend bool operator==(const AdversaryBlock&, const AdversaryBlock&) = default;
};

struct SolverBlock {
  double lambda = 3.0;
  double gamma = 0.05;
  double tol = 1e-8;
  int max_iter = 50000;
  int max_rounds = 500;
  double eq_tol = 1e-7;
  double deviation_eps = 1e-4;
  bool parallel = false;
  friend bool operator==(const SolverBlock&, const SolverBlock&) = default;
};

struct DynamicBlock {
  int stages = 5;
  double tau = 0.5;
  bool abort_on_stage_failure = false;
  friend bool operator==(const DynamicBlock&, const DynamicBlock&) = default;
};

struct DistributedBlock {
  std::string schedule = "async";
  double activation = 0.5;
  std::uint64_t seed = 42;
  int max_ticks = 200000;
  int adversary_period = 10;
  friend bool operator==(const DistributedBlock&, const DistributedBlock&) = default;
};

struct ScenarioConfig {
  NetworkBlock network;
  std::optional<AdversaryBlock> adversary;
  SolverBlock solver;
  DynamicBlock dynamic;
  DistributedBlock distributed;
  friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

// Throws ParseError ("line L, column C: ...") for malformed text and
// ValidationError ("<field path>: ...") for unknown fields, wrong types and
// violated model invariants.
ScenarioConfig parse_scenario(std::string_view text);
ScenarioConfig load_scenario(const std::string& path);

// Checks every model invariant the config implies. Throws ValidationError.
void validate_scenario(const ScenarioConfig& config);

std::string echo_scenario(const ScenarioConfig& config);

BipartiteNetwork network_of(const ScenarioConfig& config);
// Weights in the network's canonical edge order.
PerceptionWeights weights_of(const ScenarioConfig& config, const BipartiteNetwork& network);
SolverSettings settings_of(const ScenarioConfig& config);
// Throws ValidationError when the adversary block is missing.
GameSpec game_of(const ScenarioConfig& config);
EquilibriumOptions equilibrium_options_of(const ScenarioConfig& config);
DynamicOptions dynamic_options_of(const ScenarioConfig& config);
Schedule schedule_of(const ScenarioConfig& config);

}  // namespace advot
