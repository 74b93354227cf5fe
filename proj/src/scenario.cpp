#include "advot/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "advot/error.hpp"

namespace advot {

namespace {

using json = nlohmann::json;
using ordered = nlohmann::ordered_json;

[[noreturn]] void invalid(const std::string& path, const std::string& what) {
  throw Error(ErrorCode::ValidationError, path + ": " + what);
}

std::string join(const std::string& path, std::string_view key) {
  return path.empty() ? std::string(key) : path + "." + std::string(key);
}

void expect_object(const json& j, const std::string& path,
                   std::initializer_list<std::string_view> allowed) {
  if (!j.is_object()) invalid(path.empty() ? "scenario" : path, "expected an object");
  for (const auto& [key, value] : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      invalid(join(path, key), "unknown field");
    }
  }
}

const json* field(const json& j, std::string_view key) {
  const auto it = j.find(std::string(key));
  return it == j.end() ? nullptr : &*it;
}

const json& required(const json& j, const std::string& path, std::string_view key) {
  const json* v = field(j, key);
  if (!v) invalid(join(path, key), "missing required field");
  return *v;
}

double as_number(const json& j, const std::string& path) {
  if (!j.is_number()) invalid(path, "expected a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) invalid(path, "expected a finite number");
  return v;
}

template <typename Int>
Int as_integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) invalid(path, "expected an integer");
  if constexpr (std::is_unsigned_v<Int>) {
    if (j.is_number_unsigned()) return j.get<Int>();
    if (j.get<std::int64_t>() < 0) invalid(path, "expected a nonnegative integer");
    return static_cast<Int>(j.get<std::int64_t>());
  } else {
    const auto v = j.get<std::int64_t>();
    if (v < std::numeric_limits<Int>::min() || v > std::numeric_limits<Int>::max()) {
      invalid(path, "integer out of range");
    }
    return static_cast<Int>(v);
  }
}

std::string as_string(const json& j, const std::string& path) {
  if (!j.is_string()) invalid(path, "expected a string");
  return j.get<std::string>();
}

bool as_bool(const json& j, const std::string& path) {
  if (!j.is_boolean()) invalid(path, "expected true or false");
  return j.get<bool>();
}

std::vector<double> as_numbers(const json& j, const std::string& path) {
  if (!j.is_array()) invalid(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_number(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

std::vector<std::string> as_strings(const json& j, const std::string& path) {
  if (!j.is_array()) invalid(path, "expected an array of strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < j.size(); ++i) {
    out.push_back(as_string(j[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

template <typename T, typename Get>
void optional_field(const json& j, const std::string& path, std::string_view key, T& out,
                    Get get) {
  if (const json* v = field(j, key)) out = get(*v, join(path, key));
}

NetworkBlock read_network(const json& j) {
  const std::string path = "network";
  expect_object(j, path, {"sources", "targets", "capacities", "edges"});
  NetworkBlock n;
  n.sources = as_strings(required(j, path, "sources"), "network.sources");
  n.targets = as_strings(required(j, path, "targets"), "network.targets");
  n.capacities = as_numbers(required(j, path, "capacities"), "network.capacities");
  const json& edges = required(j, path, "edges");
  if (!edges.is_array()) invalid("network.edges", "expected an array of edge objects");
  for (std::size_t i = 0; i < edges.size(); ++i) {
    const std::string p = "network.edges[" + std::to_string(i) + "]";
    expect_object(edges[i], p, {"source", "target", "weight", "punishment"});
    ScenarioEdge e;
    e.source = as_string(required(edges[i], p, "source"), p + ".source");
    e.target = as_string(required(edges[i], p, "target"), p + ".target");
    e.weight = as_number(required(edges[i], p, "weight"), p + ".weight");
    if (const json* k = field(edges[i], "punishment")) e.punishment = as_number(*k, p + ".punishment");
    n.edges.push_back(std::move(e));
  }
  return n;
}

AdversaryBlock read_adversary(const json& j, std::size_t num_targets) {
  const std::string path = "adversary";
  expect_object(j, path, {"minor_caps", "major_caps", "punishment", "beta1", "beta2", "prior"});
  AdversaryBlock a;
  a.minor_caps = as_numbers(required(j, path, "minor_caps"), "adversary.minor_caps");
  a.major_caps = as_numbers(required(j, path, "major_caps"), "adversary.major_caps");
  if (const json* k = field(j, "punishment")) a.punishment = as_numbers(*k, "adversary.punishment");
  optional_field(j, path, "beta1", a.beta1, as_number);
  optional_field(j, path, "beta2", a.beta2, as_number);
  if (const json* prior = field(j, "prior")) {
    if (!prior->is_array()) invalid("adversary.prior", "expected an array of [minor, major] pairs");
    for (std::size_t i = 0; i < prior->size(); ++i) {
      const std::string p = "adversary.prior[" + std::to_string(i) + "]";
      const auto pair = as_numbers((*prior)[i], p);
      if (pair.size() != 2) invalid(p, "expected [minor, major]");
      a.prior.push_back({pair[0], pair[1]});
    }
  } else {
    a.prior.assign(num_targets, {0.5, 0.5});
  }
  return a;
}

SolverBlock read_solver(const json& j) {
  const std::string path = "solver";
  expect_object(j, path,
                {"lambda", "gamma", "tol", "max_iter", "max_rounds", "eq_tol", "deviation_eps",
                 "parallel"});
  SolverBlock s;
  optional_field(j, path, "lambda", s.lambda, as_number);
  optional_field(j, path, "gamma", s.gamma, as_number);
  optional_field(j, path, "tol", s.tol, as_number);
  optional_field(j, path, "max_iter", s.max_iter, as_integer<int>);
  optional_field(j, path, "max_rounds", s.max_rounds, as_integer<int>);
  optional_field(j, path, "eq_tol", s.eq_tol, as_number);
  optional_field(j, path, "deviation_eps", s.deviation_eps, as_number);
  optional_field(j, path, "parallel", s.parallel, as_bool);
  return s;
}

DynamicBlock read_dynamic(const json& j) {
  const std::string path = "dynamic";
  expect_object(j, path, {"stages", "tau", "abort_on_stage_failure"});
  DynamicBlock d;
  optional_field(j, path, "stages", d.stages, as_integer<int>);
  optional_field(j, path, "tau", d.tau, as_number);
  optional_field(j, path, "abort_on_stage_failure", d.abort_on_stage_failure, as_bool);
  return d;
}

DistributedBlock read_distributed(const json& j) {
  const std::string path = "distributed";
  expect_object(j, path, {"schedule", "activation", "seed", "max_ticks", "adversary_period"});
  DistributedBlock d;
  optional_field(j, path, "schedule", d.schedule, as_string);
  optional_field(j, path, "activation", d.activation, as_number);
  optional_field(j, path, "seed", d.seed, as_integer<std::uint64_t>);
  optional_field(j, path, "max_ticks", d.max_ticks, as_integer<int>);
  optional_field(j, path, "adversary_period", d.adversary_period, as_integer<int>);
  return d;
}

// 1-based line and column of a byte offset.
std::pair<std::size_t, std::size_t> position_of(std::string_view text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return {line, col};
}

// Rethrows a model error as a ValidationError naming the config field.
template <typename F>
auto checked(const std::string& path, F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ValidationError) throw;
    invalid(path, e.what());
  }
}

AdversaryCostParams cost_of(const ScenarioConfig& config, const BipartiteNetwork& net) {
  const AdversaryBlock& a = *config.adversary;
  AdversaryCostParams cost;
  cost.beta1 = a.beta1;
  cost.beta2 = a.beta2;
  cost.punishment.assign(net.num_edges(), 0.0);
  std::vector<bool> set(net.num_edges(), false);
  for (const ScenarioEdge& e : config.network.edges) {
    if (!e.punishment) continue;
    const std::size_t idx =
        *net.find_edge(*net.find_source(e.source), *net.find_target(e.target));
    cost.punishment[idx] = *e.punishment;
    set[idx] = true;
  }
  for (std::size_t e = 0; e < net.num_edges(); ++e) {
    if (set[e]) continue;
    if (!a.punishment) {
      invalid("adversary.punishment",
              "edge " + net.edge_label(e) + " has no punishment and no per-target default");
    }
    cost.punishment[e] = a.punishment->at(net.edge(e).target);
  }
  return cost;
}

}  // namespace

ScenarioConfig parse_scenario(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const auto [line, col] = position_of(text, e.byte == 0 ? 0 : e.byte - 1);
    std::string what = e.what();
    // Drop the library's own prefix and location, keep its description.
    if (const auto p = what.find("syntax error"); p != std::string::npos) what = what.substr(p);
    throw Error(ErrorCode::ParseError,
                "line " + std::to_string(line) + ", column " + std::to_string(col) + ": " + what);
  }

  expect_object(doc, "", {"network", "adversary", "solver", "dynamic", "distributed"});
  ScenarioConfig config;
  config.network = read_network(required(doc, "", "network"));
  if (const json* a = field(doc, "adversary")) {
    config.adversary = read_adversary(*a, config.network.targets.size());
  }
  if (const json* s = field(doc, "solver")) config.solver = read_solver(*s);
  if (const json* d = field(doc, "dynamic")) config.dynamic = read_dynamic(*d);
  if (const json* d = field(doc, "distributed")) config.distributed = read_distributed(*d);
  validate_scenario(config);
  return config;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_scenario(text.str());
}

void validate_scenario(const ScenarioConfig& config) {
  const NetworkBlock& n = config.network;
  if (n.capacities.size() != n.sources.size()) {
    invalid("network.capacities", "expected " + std::to_string(n.sources.size()) +
                                      " values (one per source), got " +
                                      std::to_string(n.capacities.size()));
  }
  const BipartiteNetwork net = checked("network", [&] { return network_of(config); });

  const SolverBlock& s = config.solver;
  if (!(s.lambda >= 0.0)) invalid("solver.lambda", "must be >= 0");
  if (!(s.gamma > 0.0)) invalid("solver.gamma", "must be > 0");
  if (!(s.tol > 0.0)) invalid("solver.tol", "must be > 0");
  if (s.max_iter < 1) invalid("solver.max_iter", "must be >= 1");
  if (s.max_rounds < 1) invalid("solver.max_rounds", "must be >= 1");
  if (!(s.eq_tol > 0.0)) invalid("solver.eq_tol", "must be > 0");
  if (!(s.deviation_eps > 0.0)) invalid("solver.deviation_eps", "must be > 0");

  if (config.dynamic.stages < 1) invalid("dynamic.stages", "must be >= 1");
  if (!(config.dynamic.tau >= 0.0)) invalid("dynamic.tau", "must be >= 0");

  checked("distributed.schedule", [&] { return parse_schedule_mode(config.distributed.schedule); });
  checked("distributed", [&] {
    validate_schedule(schedule_of(config));
    return 0;
  });

  if (!config.adversary) return;
  const AdversaryBlock& a = *config.adversary;
  const std::size_t nt = n.targets.size();
  if (a.minor_caps.size() != nt) invalid("adversary.minor_caps", "expected one value per target");
  if (a.major_caps.size() != nt) invalid("adversary.major_caps", "expected one value per target");
  if (a.punishment && a.punishment->size() != nt) {
    invalid("adversary.punishment", "expected one value per target");
  }
  if (a.prior.size() != nt) invalid("adversary.prior", "expected one pair per target");
  checked("adversary.minor_caps/major_caps", [&] {
    validate_bounds({a.minor_caps, a.major_caps}, nt);
    return 0;
  });
  checked("adversary.prior", [&] { return BeliefState(a.prior); });
  checked("adversary.punishment", [&] {
    validate_cost_params(cost_of(config, net), net);
    return 0;
  });
}

std::string echo_scenario(const ScenarioConfig& config) {
  ordered doc;
  const NetworkBlock& n = config.network;
  ordered edges = ordered::array();
  for (const ScenarioEdge& e : n.edges) {
    ordered edge{{"source", e.source}, {"target", e.target}, {"weight", e.weight}};
    if (e.punishment) edge["punishment"] = *e.punishment;
    edges.push_back(std::move(edge));
  }
  doc["network"] = ordered{{"sources", n.sources},
                           {"targets", n.targets},
                           {"capacities", n.capacities},
                           {"edges", std::move(edges)}};
  if (config.adversary) {
    const AdversaryBlock& a = *config.adversary;
    ordered adv{{"minor_caps", a.minor_caps}, {"major_caps", a.major_caps}};
    if (a.punishment) adv["punishment"] = *a.punishment;
    adv["beta1"] = a.beta1;
    adv["beta2"] = a.beta2;
    adv["prior"] = a.prior;
    doc["adversary"] = std::move(adv);
  }
  const SolverBlock& s = config.solver;
  doc["solver"] = ordered{{"lambda", s.lambda},         {"gamma", s.gamma},
                          {"tol", s.tol},               {"max_iter", s.max_iter},
                          {"max_rounds", s.max_rounds}, {"eq_tol", s.eq_tol},
                          {"deviation_eps", s.deviation_eps}, {"parallel", s.parallel}};
  doc["dynamic"] = ordered{{"stages", config.dynamic.stages},
                           {"tau", config.dynamic.tau},
                           {"abort_on_stage_failure", config.dynamic.abort_on_stage_failure}};
  const DistributedBlock& d = config.distributed;
  doc["distributed"] = ordered{{"schedule", d.schedule},
                               {"activation", d.activation},
                               {"seed", d.seed},
                               {"max_ticks", d.max_ticks},
                               {"adversary_period", d.adversary_period}};
  return doc.dump(2) + "\n";
}

BipartiteNetwork network_of(const ScenarioConfig& config) {
  std::vector<EdgeSpec> edges;
  for (const ScenarioEdge& e : config.network.edges) edges.push_back({e.source, e.target});
  return build_network(config.network.sources, config.network.targets, edges,
                       config.network.capacities);
}

PerceptionWeights weights_of(const ScenarioConfig& config, const BipartiteNetwork& network) {
  PerceptionWeights w{EdgeValues(network.num_edges(), 0.0)};
  for (const ScenarioEdge& e : config.network.edges) {
    w.values[*network.find_edge(*network.find_source(e.source), *network.find_target(e.target))] =
        e.weight;
  }
  return w;
}

SolverSettings settings_of(const ScenarioConfig& config) {
  SolverSettings s;
  s.lambda = config.solver.lambda;
  s.gamma = config.solver.gamma;
  s.tol = config.solver.tol;
  s.max_iter = config.solver.max_iter;
  s.exec = config.solver.parallel ? ExecutionMode::Parallel : ExecutionMode::Serial;
  return s;
}

GameSpec game_of(const ScenarioConfig& config) {
  if (!config.adversary) invalid("adversary", "this command needs an adversary block");
  const AdversaryBlock& a = *config.adversary;
  BipartiteNetwork net = network_of(config);
  PerceptionWeights w = weights_of(config, net);
  AdversaryCostParams cost = cost_of(config, net);
  return {std::move(net), std::move(w), {a.minor_caps, a.major_caps}, std::move(cost),
          BeliefState(a.prior), settings_of(config)};
}

EquilibriumOptions equilibrium_options_of(const ScenarioConfig& config) {
  EquilibriumOptions o;
  o.tol = config.solver.eq_tol;
  o.max_rounds = config.solver.max_rounds;
  o.deviation_eps = config.solver.deviation_eps;
  return o;
}

DynamicOptions dynamic_options_of(const ScenarioConfig& config) {
  DynamicOptions o;
  o.stages = config.dynamic.stages;
  o.tau = config.dynamic.tau;
  o.abort_on_stage_failure = config.dynamic.abort_on_stage_failure;
  o.equilibrium = equilibrium_options_of(config);
  return o;
}

Schedule schedule_of(const ScenarioConfig& config) {
  Schedule s;
  s.mode = parse_schedule_mode(config.distributed.schedule);
  s.activation = config.distributed.activation;
  s.seed = config.distributed.seed;
  s.max_ticks = config.distributed.max_ticks;
  s.adversary_period = config.distributed.adversary_period;
  s.exec = config.solver.parallel ? ExecutionMode::Parallel : ExecutionMode::Serial;
  return s;
}

}  // namespace advot
