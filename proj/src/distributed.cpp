#include "advot/distributed.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "advot/error.hpp"
#include "advot/kernels.hpp"

namespace advot {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
const std::string kSim = "sim";

thread_local const std::string* current_context = nullptr;

[[noreturn]] void corrupt(const std::string& what) { throw Error(ErrorCode::CorruptLog, what); }

std::size_t find_peer(const std::vector<std::string>& peers, const std::string& key) {
  const auto it = std::find(peers.begin(), peers.end(), key);
  if (it == peers.end()) corrupt("message from unconnected agent " + key);
  return static_cast<std::size_t>(it - peers.begin());
}

bool same_bits(const Message& a, const Message& b) {
  if (a.tick != b.tick || a.sender != b.sender || a.receiver != b.receiver || a.kind != b.kind ||
      a.values.size() != b.values.size()) {
    return false;
  }
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    if (std::bit_cast<std::uint64_t>(a.values[i]) != std::bit_cast<std::uint64_t>(b.values[i])) {
      return false;
    }
  }
  return true;
}

std::size_t as_index(double v, std::size_t bound, const std::string& what) {
  if (!(v >= 0.0) || v != std::floor(v) || v >= static_cast<double>(bound)) {
    corrupt(what + ": bad index");
  }
  return static_cast<std::size_t>(v);
}

std::string strip_prefix(const std::string& key, std::string_view prefix) {
  if (key.rfind(prefix, 0) != 0 || key.size() == prefix.size()) corrupt("bad agent key " + key);
  return key.substr(prefix.size());
}

// Parameters carried by the "run" record.
struct RunParams {
  double lambda = 0.0;
  double gamma = 0.0;
  double tol = 0.0;
  std::int64_t max_ticks = 0;
  std::int64_t period = 1;
  bool adversary = false;
  bool record_trace = false;
  std::size_t num_sources = 0;
  std::size_t num_targets = 0;
};

Message run_record(const RunParams& p) {
  return {0, kSim, kSim, "run",
          {p.lambda, p.gamma, p.tol, static_cast<double>(p.max_ticks),
           static_cast<double>(p.period), p.adversary ? 1.0 : 0.0, p.record_trace ? 1.0 : 0.0,
           static_cast<double>(p.num_sources), static_cast<double>(p.num_targets)}};
}

RunParams parse_run_record(const Message& m) {
  if (m.kind != "run" || m.values.size() != 9) corrupt("first record must be the run record");
  RunParams p;
  p.lambda = m.values[0];
  p.gamma = m.values[1];
  p.tol = m.values[2];
  constexpr auto big = std::numeric_limits<std::size_t>::max();
  p.max_ticks = static_cast<std::int64_t>(as_index(m.values[3], big, "max_ticks"));
  p.period = static_cast<std::int64_t>(as_index(m.values[4], big, "period"));
  p.adversary = m.values[5] != 0.0;
  p.record_trace = m.values[6] != 0.0;
  p.num_sources = as_index(m.values[7], big, "num_sources");
  p.num_targets = as_index(m.values[8], big, "num_targets");
  if (!(p.lambda > 0.0) || !(p.gamma > 0.0) || !(p.tol > 0.0) || p.period < 1 ||
      p.num_sources == 0 || p.num_targets == 0) {
    corrupt("run record has invalid parameters");
  }
  return p;
}

// Setup section of the log: run record, one init per source, one per target.
std::vector<Message> setup_records(const BipartiteNetwork& net, const PerceptionWeights& weights,
                                   const RunParams& params, const GameSpec* game) {
  std::vector<Message> out;
  out.push_back(run_record(params));
  for (std::size_t j = 0; j < net.num_sources(); ++j) {
    Message m{0, kSim, "src:" + net.source_id(j), "init", {net.capacity(j)}};
    for (std::size_t e = net.row_begin(j); e < net.row_end(j); ++e) {
      m.values.push_back(static_cast<double>(net.edge(e).target));
      m.values.push_back(weights.values[e]);
    }
    out.push_back(std::move(m));
  }
  for (std::size_t q = 0; q < net.num_targets(); ++q) {
    Message m{0, kSim, "tgt:" + net.target_id(q), "init", {}};
    if (game) {
      m.values = {game->bounds.minor_cap[q],
                  game->bounds.major_cap[q],
                  game->belief.prob(q, OffenderType::Minor),
                  game->belief.prob(q, OffenderType::Major),
                  game->cost.beta1,
                  game->cost.beta2};
      for (std::size_t e : net.edges_into(q)) {
        m.values.push_back(static_cast<double>(net.edge(e).source));
        m.values.push_back(game->cost.punishment[e]);
      }
    }
    out.push_back(std::move(m));
  }
  return out;
}

using Activation = std::function<std::vector<std::size_t>(std::int64_t)>;
using Sink = std::function<void(const Message&)>;

class Engine {
 public:
  // Builds agents from the setup section; records.size() may exceed it.
  Engine(std::span<const Message> records, AccessAudit* audit) {
    if (records.empty()) corrupt("empty log");
    params_ = parse_run_record(records[0]);
    const std::size_t ns = params_.num_sources;
    const std::size_t nt = params_.num_targets;
    if (records.size() < 1 + ns + nt) corrupt("log ends inside the setup section");

    std::vector<std::string> source_ids;
    std::vector<std::string> target_ids;
    for (std::size_t i = 0; i < ns + nt; ++i) {
      const Message& m = records[1 + i];
      if (m.kind != "init" || m.tick != 0 || m.sender != kSim) corrupt("bad init record");
      if (i < ns) {
        source_ids.push_back(strip_prefix(m.receiver, "src:"));
      } else {
        target_ids.push_back(strip_prefix(m.receiver, "tgt:"));
      }
    }

    std::vector<EdgeSpec> edges;
    std::vector<double> caps;
    std::vector<std::vector<std::string>> source_peers(ns);
    std::vector<std::vector<double>> source_weights(ns);
    for (std::size_t j = 0; j < ns; ++j) {
      const auto& v = records[1 + j].values;
      if (v.size() < 3 || v.size() % 2 == 0) corrupt("bad source init record");
      caps.push_back(v[0]);
      for (std::size_t k = 1; k < v.size(); k += 2) {
        const std::size_t q = as_index(v[k], nt, "source init");
        edges.push_back({source_ids[j], target_ids[q]});
        source_peers[j].push_back("tgt:" + target_ids[q]);
        source_weights[j].push_back(v[k + 1]);
      }
    }
    try {
      network_ = build_network(source_ids, target_ids, edges, caps);
    } catch (const Error& e) {
      corrupt(std::string("setup does not describe a valid network: ") + e.what());
    }
    for (std::size_t j = 0; j < ns; ++j) {
      if (network_.row_end(j) - network_.row_begin(j) != source_peers[j].size()) {
        corrupt("source init record lists edges out of order");
      }
      for (std::size_t e = network_.row_begin(j), k = 0; e < network_.row_end(j); ++e, ++k) {
        if ("tgt:" + network_.target_id(network_.edge(e).target) != source_peers[j][k]) {
          corrupt("source init record lists edges out of order");
        }
      }
      sources_.emplace_back("src:" + source_ids[j], caps[j], source_peers[j], source_weights[j],
                            audit);
      route_.emplace(sources_.back().key(), j);
    }

    if (params_.adversary) {
      for (std::size_t q = 0; q < nt; ++q) {
        const auto& v = records[1 + ns + q].values;
        const auto incoming = network_.edges_into(q);
        if (v.size() != 6 + 2 * incoming.size()) corrupt("bad target init record");
        TargetParams tp{v[0], v[1], {v[2], v[3]}, v[4], v[5]};
        std::vector<std::string> peers;
        std::vector<double> punishment;
        for (std::size_t k = 0; k < incoming.size(); ++k) {
          const std::size_t j = as_index(v[6 + 2 * k], ns, "target init");
          if (j != network_.edge(incoming[k]).source) corrupt("target init record mismatch");
          peers.push_back("src:" + source_ids[j]);
          punishment.push_back(v[7 + 2 * k]);
        }
        targets_.emplace_back("tgt:" + target_ids[q], tp, std::move(peers),
                              std::move(punishment), audit);
        route_.emplace(targets_.back().key(), ns + q);
      }
    }
    setup_size_ = 1 + ns + nt;
  }

  std::size_t setup_size() const { return setup_size_; }
  std::size_t num_sources() const { return sources_.size(); }
  const RunParams& params() const { return params_; }

  DistributedRun run(const Activation& next, const Sink& emit, ExecutionMode exec) {
    const std::size_t ns = sources_.size();
    std::size_t emitted = setup_size_;
    auto send = [&](const Message& m) {
      emit(m);
      ++emitted;
    };

    DistributedRun out;
    std::vector<Message> inbox;
    std::vector<Message> outbox;
    std::vector<std::vector<Message>> per_agent(ns);
    double target_change = params_.adversary ? kInf : 0.0;
    std::int64_t t = 0;
    bool converged = false;
    double residual = kInf;

    for (t = 1; t <= params_.max_ticks; ++t) {
      for (const Message& m : inbox) deliver(m);
      inbox.clear();

      const std::vector<std::size_t> active = next(t);
      Message activate{t, kSim, kSim, "activate", {}};
      for (std::size_t j : active) activate.values.push_back(static_cast<double>(j));
      send(activate);

      tick_sources(active, t, exec, per_agent);
      for (std::size_t i = 0; i < active.size(); ++i) {
        for (Message& m : per_agent[i]) {
          send(m);
          inbox.push_back(std::move(m));
        }
        per_agent[i].clear();
      }

      const bool adversary_tick = params_.adversary && t % params_.period == 0;
      if (adversary_tick) {
        target_change = 0.0;
        for (TargetAgent& a : targets_) {
          AccessAudit::Scope scope(a.key());
          target_change = std::max(target_change, a.update());
          for (Message& m : a.outgoing(t)) {
            send(m);
            inbox.push_back(std::move(m));
          }
        }
      }

      double source_residual = 0.0;
      bool all_fresh = true;
      bool nan = std::isnan(target_change);
      for (const SourceAgent& a : sources_) {
        const double r = a.residual();
        nan = nan || std::isnan(r);
        source_residual = std::max(source_residual, r);
        all_fresh = all_fresh && a.fresh();
      }
      residual = std::max(source_residual, target_change);
      if (nan) residual = std::numeric_limits<double>::quiet_NaN();

      if (params_.record_trace) record(t, residual, out);
      if (nan) break;
      if ((!params_.adversary || adversary_tick) && residual <= params_.tol) {
        converged = true;
        break;
      }
      if (all_fresh && !std::isfinite(source_residual)) break;
    }
    const std::int64_t last = std::min(t, params_.max_ticks);

    out.report.iterations = static_cast<int>(last);
    out.report.residual = residual;
    out.report.converged = converged;
    for (const SourceAgent& a : sources_) {
      out.report.prices.values.push_back(a.price());
      for (double x : a.rates()) out.report.plan.rates.push_back(x);
    }
    if (params_.adversary) {
      AdversaryStrategy s;
      for (const TargetAgent& a : targets_) {
        s.minor.push_back(a.xi(OffenderType::Minor));
        s.major.push_back(a.xi(OffenderType::Major));
      }
      out.strategy = std::move(s);
    }
    send({last, kSim, kSim, "end",
          {static_cast<double>(emitted), static_cast<double>(last), converged ? 1.0 : 0.0}});
    return out;
  }

 private:
  void deliver(const Message& m) {
    const auto it = route_.find(m.receiver);
    if (it == route_.end()) corrupt("message to unknown agent " + m.receiver);
    AccessAudit::Scope scope(m.receiver);
    if (it->second < sources_.size()) {
      sources_[it->second].receive(m);
    } else {
      targets_[it->second - sources_.size()].receive(m);
    }
  }

  void tick_sources(const std::vector<std::size_t>& active, std::int64_t t, ExecutionMode exec,
                    std::vector<std::vector<Message>>& per_agent) {
    const auto n = static_cast<std::ptrdiff_t>(active.size());
    const bool report_rates = params_.adversary;
    auto step = [&](std::ptrdiff_t i) {
      SourceAgent& a = sources_[active[i]];
      AccessAudit::Scope scope(a.key());
      a.tick(params_.gamma, params_.lambda);
      if (report_rates) per_agent[i] = a.outgoing(t);
    };
    if (exec == ExecutionMode::Parallel) {
#pragma omp parallel for schedule(static)
      for (std::ptrdiff_t i = 0; i < n; ++i) step(i);
    } else {
      for (std::ptrdiff_t i = 0; i < n; ++i) step(i);
    }
  }

  void record(std::int64_t t, double residual, DistributedRun& out) const {
    TickRecord rec;
    rec.tick = t;
    rec.residual = residual;
    PerceptionWeights weights;
    for (const SourceAgent& a : sources_) {
      rec.prices.push_back(a.price());
      for (double x : a.rates()) rec.rates.push_back(x);
      for (double w : a.weights()) weights.values.push_back(w);
    }
    for (const TargetAgent& a : targets_) {
      rec.xi_minor.push_back(a.xi(OffenderType::Minor));
      rec.xi_major.push_back(a.xi(OffenderType::Major));
    }
    out.report.trace.push_back({static_cast<int>(t), rec.prices, residual,
                                planner_objective({rec.rates}, weights, params_.lambda)});
    out.ticks.push_back(std::move(rec));
  }

  RunParams params_;
  BipartiteNetwork network_;
  std::vector<SourceAgent> sources_;
  std::vector<TargetAgent> targets_;
  std::unordered_map<std::string, std::size_t> route_;
  std::size_t setup_size_ = 0;
};

// Uniform double in [0, 1) from the top 53 bits.
double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

DistributedRun run_engine(const BipartiteNetwork& network, const PerceptionWeights& weights,
                          const SolverSettings& settings, const Schedule& schedule,
                          const GameSpec* game, AccessAudit* audit) {
  validate_settings(settings);
  validate_weights(weights, network);
  validate_schedule(schedule);

  RunParams params;
  params.lambda = settings.lambda;
  params.gamma = schedule.gamma.value_or(
      schedule.mode == ScheduleMode::Synchronous ? settings.gamma : settings.gamma / 2.0);
  params.tol = settings.tol;
  params.max_ticks = schedule.max_ticks;
  params.period = schedule.adversary_period;
  params.adversary = game != nullptr;
  params.record_trace = schedule.record_trace;
  params.num_sources = network.num_sources();
  params.num_targets = network.num_targets();

  MessageLog log;
  for (Message& m : setup_records(network, weights, params, game)) log.append(std::move(m));
  Engine engine(log.records(), audit);

  const std::size_t ns = network.num_sources();
  std::mt19937_64 rng(schedule.seed);
  auto next = [&](std::int64_t t) {
    std::vector<std::size_t> active;
    switch (schedule.mode) {
      case ScheduleMode::Synchronous:
        for (std::size_t j = 0; j < ns; ++j) active.push_back(j);
        break;
      case ScheduleMode::RandomSubset:
        for (std::size_t j = 0; j < ns; ++j) {
          if (uniform01(rng) < schedule.activation) active.push_back(j);
        }
        break;
      case ScheduleMode::RoundRobin:
        active.push_back(static_cast<std::size_t>((t - 1) % static_cast<std::int64_t>(ns)));
        break;
    }
    return active;
  };
  DistributedRun run = engine.run(next, [&](const Message& m) { log.append(m); }, schedule.exec);
  run.log = std::move(log);
  return run;
}

}  // namespace

void MessageLog::write(std::ostream& out) const {
  for (const Message& m : records_) {
    nlohmann::ordered_json j;
    j["tick"] = m.tick;
    j["sender"] = m.sender;
    j["receiver"] = m.receiver;
    j["kind"] = m.kind;
    j["values"] = m.values;
    out << j.dump() << '\n';
  }
  if (!out) throw Error(ErrorCode::IoError, "failed to write message log");
}

std::string MessageLog::to_string() const {
  std::ostringstream out;
  write(out);
  return out.str();
}

MessageLog MessageLog::read(std::istream& in) {
  MessageLog log;
  std::string line;
  std::size_t line_no = 0;
  bool ended = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no);
    if (ended) corrupt(where + ": record after end");
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      corrupt(where + ": " + e.what());
    }
    if (!j.is_object() || j.size() != 5 || !j.contains("tick") || !j["tick"].is_number_integer() ||
        !j.contains("sender") || !j["sender"].is_string() || !j.contains("receiver") ||
        !j["receiver"].is_string() || !j.contains("kind") || !j["kind"].is_string() ||
        !j.contains("values") || !j["values"].is_array()) {
      corrupt(where + ": malformed record");
    }
    Message m;
    m.tick = j["tick"].get<std::int64_t>();
    m.sender = j["sender"].get<std::string>();
    m.receiver = j["receiver"].get<std::string>();
    m.kind = j["kind"].get<std::string>();
    for (const auto& v : j["values"]) {
      if (!v.is_number()) corrupt(where + ": non-numeric value");
      m.values.push_back(v.get<double>());
    }
    if (m.kind == "end") {
      if (m.values.empty() || m.values[0] != static_cast<double>(log.size())) {
        corrupt(where + ": end record count does not match");
      }
      ended = true;
    }
    log.append(std::move(m));
  }
  if (!ended) corrupt("log has no end record (truncated)");
  return log;
}

MessageLog MessageLog::from_string(const std::string& text) {
  std::istringstream in(text);
  return read(in);
}

AccessAudit::Scope::Scope(const std::string& agent) : saved_(current_context) {
  current_context = &agent;
}

AccessAudit::Scope::~Scope() { current_context = saved_; }

void AccessAudit::record(const std::string& owner) {
  const std::string* context = current_context;
  std::lock_guard lock(mutex_);
  ++accesses_;
  if (context && *context != owner) violations_.push_back({*context, owner});
}

std::size_t AccessAudit::accesses() const {
  std::lock_guard lock(mutex_);
  return accesses_;
}

std::vector<AccessAudit::Access> AccessAudit::violations() const {
  std::lock_guard lock(mutex_);
  return violations_;
}

SourceAgent::SourceAgent(std::string key, double capacity, std::vector<std::string> targets,
                         std::vector<double> base_weights, AccessAudit* audit)
    : key_(std::move(key)),
      capacity_(capacity),
      targets_(std::move(targets)),
      base_(std::move(base_weights)),
      weights_(base_),
      rates_(base_.size(), 0.0),
      residual_(kInf),
      audit_(audit) {
  if (targets_.size() != base_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "source agent: one weight per target expected");
  }
}

void SourceAgent::touch() const {
  if (audit_) audit_->record(key_);
}

double SourceAgent::price() const {
  touch();
  return price_;
}

const std::vector<double>& SourceAgent::rates() const {
  touch();
  return rates_;
}

const std::vector<double>& SourceAgent::weights() const {
  touch();
  return weights_;
}

double SourceAgent::residual() const {
  touch();
  return fresh_ ? residual_ : kInf;
}

bool SourceAgent::fresh() const {
  touch();
  return fresh_;
}

void SourceAgent::receive(const Message& message) {
  touch();
  if (message.kind != "weights" || message.values.size() != 2) {
    corrupt(key_ + ": unexpected " + message.kind + " message");
  }
  const std::size_t k = find_peer(targets_, message.sender);
  weights_[k] = base_[k] + message.values[0] + message.values[1];
  fresh_ = false;
}

void SourceAgent::tick(double gamma, double lambda) {
  touch();
  double change = 0.0;
  for (std::size_t k = 0; k < rates_.size(); ++k) {
    const double x = kernels::primal_rate(weights_[k], price_, lambda);
    change = std::max(change, std::abs(x - rates_[k]));
    rates_[k] = x;
  }
  const double sum = kernels::row_total(rates_, 0, rates_.size());
  const double compl_res = std::abs(std::min(price_, capacity_ - sum));
  price_ = kernels::projected_price(price_, sum, capacity_, gamma);
  residual_ = std::max(compl_res, change);
  fresh_ = true;
}

void SourceAgent::set_weights(std::vector<double> weights) {
  touch();
  if (weights.size() != weights_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "source agent: one weight per target expected");
  }
  weights_ = std::move(weights);
  fresh_ = false;
}

std::vector<Message> SourceAgent::outgoing(std::int64_t tick) const {
  touch();
  std::vector<Message> out;
  out.reserve(targets_.size());
  for (std::size_t k = 0; k < targets_.size(); ++k) {
    out.push_back({tick, key_, targets_[k], "rates", {rates_[k]}});
  }
  return out;
}

SourceAgent agent_tick(SourceAgent agent, std::vector<double> weights, double gamma,
                       double lambda) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::ZeroLambda, "agent tick needs lambda > 0");
  agent.set_weights(std::move(weights));
  agent.tick(gamma, lambda);
  return agent;
}

TargetAgent::TargetAgent(std::string key, TargetParams params, std::vector<std::string> sources,
                         std::vector<double> punishment, AccessAudit* audit)
    : key_(std::move(key)),
      params_(params),
      sources_(std::move(sources)),
      punishment_(std::move(punishment)),
      rates_(sources_.size(), 0.0),
      xi_{params.minor_cap, params.major_cap},
      audit_(audit) {
  if (punishment_.size() != sources_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "target agent: one punishment per source expected");
  }
}

void TargetAgent::touch() const {
  if (audit_) audit_->record(key_);
}

double TargetAgent::xi(OffenderType t) const {
  touch();
  return xi_[type_slot(t)];
}

void TargetAgent::receive(const Message& message) {
  touch();
  if (message.kind != "rates" || message.values.size() != 1) {
    corrupt(key_ + ": unexpected " + message.kind + " message");
  }
  rates_[find_peer(sources_, message.sender)] = message.values[0];
}

double TargetAgent::update() {
  touch();
  double mass = 0.0;
  double flow = 0.0;
  for (std::size_t k = 0; k < rates_.size(); ++k) {
    mass += kernels::penalty_term(punishment_[k], rates_[k], params_.beta1);
    flow += rates_[k];
  }
  double change = 0.0;
  for (OffenderType t : kOffenderTypes) {
    const double cap = t == OffenderType::Minor ? params_.minor_cap : params_.major_cap;
    const double next =
        node_best_response(mass, type_value(t) * flow, params_.beta2, kPerturbationFloor, cap);
    change = std::max(change, std::abs(next - xi_[type_slot(t)]));
    xi_[type_slot(t)] = next;
  }
  return change;
}

std::vector<Message> TargetAgent::outgoing(std::int64_t tick) const {
  touch();
  std::vector<double> terms;
  for (OffenderType t : kOffenderTypes) {
    terms.push_back(params_.belief[type_slot(t)] * type_value(t) * xi_[type_slot(t)]);
  }
  std::vector<Message> out;
  out.reserve(sources_.size());
  for (const std::string& s : sources_) out.push_back({tick, key_, s, "weights", terms});
  return out;
}

std::string_view to_string(ScheduleMode mode) {
  switch (mode) {
    case ScheduleMode::Synchronous: return "sync";
    case ScheduleMode::RandomSubset: return "async";
    case ScheduleMode::RoundRobin: return "roundrobin";
  }
  return "unknown";
}

ScheduleMode parse_schedule_mode(std::string_view text) {
  if (text == "sync") return ScheduleMode::Synchronous;
  if (text == "async") return ScheduleMode::RandomSubset;
  if (text == "roundrobin") return ScheduleMode::RoundRobin;
  throw Error(ErrorCode::InvalidParameter,
              "schedule must be sync, async or roundrobin, got '" + std::string(text) + "'");
}

void validate_schedule(const Schedule& schedule) {
  if (!(schedule.activation > 0.0 && schedule.activation <= 1.0)) {
    throw Error(ErrorCode::InvalidParameter, "activation must be in (0, 1]");
  }
  if (schedule.max_ticks < 1) throw Error(ErrorCode::InvalidParameter, "max_ticks must be >= 1");
  if (schedule.adversary_period < 1) {
    throw Error(ErrorCode::InvalidParameter, "adversary_period must be >= 1");
  }
  if (schedule.gamma && (!(*schedule.gamma > 0.0) || !std::isfinite(*schedule.gamma))) {
    throw Error(ErrorCode::InvalidParameter, "agent step size must be > 0");
  }
}

DistributedRun run_distributed(const GameSpec& game, const Schedule& schedule,
                               AccessAudit* audit) {
  validate_game(game);
  return run_engine(game.network, game.weights, game.settings, schedule, &game, audit);
}

DistributedRun run_distributed(const BipartiteNetwork& network, const PerceptionWeights& weights,
                               const SolverSettings& settings, const Schedule& schedule,
                               AccessAudit* audit) {
  return run_engine(network, weights, settings, schedule, nullptr, audit);
}

DistributedRun replay(const MessageLog& log, ExecutionMode exec, AccessAudit* audit) {
  const auto& records = log.records();
  Engine engine(records, audit);
  std::size_t cursor = engine.setup_size();
  const std::size_t ns = engine.num_sources();

  auto next = [&](std::int64_t t) {
    if (cursor >= records.size()) corrupt("log ends before tick " + std::to_string(t));
    const Message& m = records[cursor];
    if (m.kind != "activate" || m.tick != t) {
      corrupt("record " + std::to_string(cursor) + ": expected activation for tick " +
              std::to_string(t));
    }
    std::vector<std::size_t> active;
    for (double v : m.values) {
      const std::size_t j = as_index(v, ns, "activation");
      if (!active.empty() && j <= active.back()) corrupt("activation list not ascending");
      active.push_back(j);
    }
    return active;
  };
  auto check = [&](const Message& m) {
    if (cursor >= records.size()) corrupt("log ends early (truncated)");
    if (!same_bits(records[cursor], m)) {
      corrupt("record " + std::to_string(cursor) + " differs from the re-executed run");
    }
    ++cursor;
  };
  DistributedRun run = engine.run(next, check, exec);
  if (cursor != records.size()) corrupt("records after the end of the run");
  run.log = log;
  return run;
}

}  // namespace advot
