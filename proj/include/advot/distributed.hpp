#pragma once

// Simulated asynchronous dual pricing. Every source node is an agent that owns
// its price and its row of the plan; every target node is an adversary agent
// that owns its perturbation. Agents only talk through messages, which a
// seeded scheduler delivers one tick after they are sent:
//
//   src -> tgt  "rates"    [x_jq]                       after each source tick
//   tgt -> src  "weights"  [mu_q(1) xi_q(1), 2 mu_q(2) xi_q(2)]  every K ticks
//
// A source's effective weight on edge (j, q) is its base weight plus the two
// terms last received from q. The whole run, including its setup, is written
// to a MessageLog that replay() re-executes and checks record by record.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "advot/bayes_static.hpp"

namespace advot {

struct Message {
  std::int64_t tick = 0;
  std::string sender;    // "src:<id>", "tgt:<id>" or "sim"
  std::string receiver;
  std::string kind;      // run, init, activate, rates, weights, end
  std::vector<double> values;
  friend bool operator==(const Message&, const Message&) = default;
};

// Append-only record of a run, serialized as one JSON object per line.
class MessageLog {
 public:
  void append(Message message) { records_.push_back(std::move(message)); }
  const std::vector<Message>& records() const { return records_; }
  std::size_t size() const { return records_.size(); }

  void write(std::ostream& out) const;
  std::string to_string() const;
  // Throws CorruptLog on malformed lines, a missing or inconsistent end
  // record, or records after it.
  static MessageLog read(std::istream& in);
  static MessageLog from_string(const std::string& text);

  friend bool operator==(const MessageLog&, const MessageLog&) = default;

 private:
  std::vector<Message> records_;
};

// Records which agent's state is touched from which agent's context. Agent
// code runs inside a Scope naming the agent; reads made by the simulator
// outside any scope are not attributed to an agent.
class AccessAudit {
 public:
  struct Access {
    std::string context;
    std::string owner;
  };

  class Scope {
   public:
    explicit Scope(const std::string& agent);
    ~Scope();
    Scope(const Scope&) = delete;
    Scope& operator=(const Scope&) = delete;

   private:
    const std::string* saved_;
  };

  void record(const std::string& owner);
  std::size_t accesses() const;
  std::vector<Access> violations() const;

 private:
  mutable std::mutex mutex_;
  std::size_t accesses_ = 0;
  std::vector<Access> violations_;
};

class SourceAgent {
 public:
  SourceAgent(std::string key, double capacity, std::vector<std::string> targets,
              std::vector<double> base_weights, AccessAudit* audit = nullptr);

  const std::string& key() const { return key_; }
  double price() const;
  const std::vector<double>& rates() const;
  const std::vector<double>& weights() const;
  // Residual measured at the last tick; infinite before the first tick and
  // after new weights arrive until the next one.
  double residual() const;
  bool fresh() const;

  // "weights" message from a connected target.
  void receive(const Message& message);
  // Primal closed form on the own row, then projected ascent on the own price.
  void tick(double gamma, double lambda);
  // Replaces the effective weights on the agent's row.
  void set_weights(std::vector<double> weights);
  // One "rates" message per connected target.
  std::vector<Message> outgoing(std::int64_t tick) const;

 private:
  void touch() const;

  std::string key_;
  double capacity_;
  std::vector<std::string> targets_;
  std::vector<double> base_;
  std::vector<double> weights_;
  std::vector<double> rates_;
  double price_ = 0.0;
  double residual_;
  bool fresh_ = false;
  AccessAudit* audit_;
};

// Functional form of one source update with the given effective weights.
SourceAgent agent_tick(SourceAgent agent, std::vector<double> weights, double gamma,
                       double lambda);

struct TargetParams {
  double minor_cap = 0.0;
  double major_cap = 0.0;
  std::array<double, 2> belief{0.5, 0.5};
  double beta1 = 0.5;
  double beta2 = 0.5;
};

class TargetAgent {
 public:
  TargetAgent(std::string key, TargetParams params, std::vector<std::string> sources,
              std::vector<double> punishment, AccessAudit* audit = nullptr);

  const std::string& key() const { return key_; }
  double xi(OffenderType t) const;

  // "rates" message from a connected source.
  void receive(const Message& message);
  // Closed-form best response to the latest rates; returns the largest change.
  double update();
  std::vector<Message> outgoing(std::int64_t tick) const;

 private:
  void touch() const;

  std::string key_;
  TargetParams params_;
  std::vector<std::string> sources_;
  std::vector<double> punishment_;
  std::vector<double> rates_;
  std::array<double, 2> xi_;
  AccessAudit* audit_;
};

enum class ScheduleMode { Synchronous, RandomSubset, RoundRobin };

std::string_view to_string(ScheduleMode mode);
// "sync", "async" (random subset) or "roundrobin". Throws InvalidParameter.
ScheduleMode parse_schedule_mode(std::string_view text);

struct Schedule {
  ScheduleMode mode = ScheduleMode::RandomSubset;
  double activation = 0.5;  // per agent per tick, random-subset only
  std::uint64_t seed = 42;
  int max_ticks = 200000;
  int adversary_period = 10;  // K
  // Agent step size; defaults to gamma when synchronous and gamma / 2 otherwise.
  std::optional<double> gamma;
  // Parallel runs a tick's activated sources concurrently.
  ExecutionMode exec = ExecutionMode::Serial;
  bool record_trace = true;
};

void validate_schedule(const Schedule& schedule);

struct TickRecord {
  std::int64_t tick = 0;
  EdgeValues rates;
  std::vector<double> prices;
  std::vector<double> xi_minor;  // empty without an adversary
  std::vector<double> xi_major;
  double residual = 0.0;
  friend bool operator==(const TickRecord&, const TickRecord&) = default;
};

struct DistributedRun {
  SolveReport report;
  std::optional<AdversaryStrategy> strategy;
  std::vector<TickRecord> ticks;
  MessageLog log;
};

// Static game with per-target adversary agents. The run stops when, on an
// adversary tick, every source residual and every target's last change is
// within settings.tol; report.converged is false when max_ticks runs out.
DistributedRun run_distributed(const GameSpec& game, const Schedule& schedule,
                               AccessAudit* audit = nullptr);

// Fixed weights, no adversary: termination is checked every tick.
DistributedRun run_distributed(const BipartiteNetwork& network, const PerceptionWeights& weights,
                               const SolverSettings& settings, const Schedule& schedule,
                               AccessAudit* audit = nullptr);

// Re-executes a logged run from its setup records and logged activations,
// checking every message it produces against the log. Throws CorruptLog.
DistributedRun replay(const MessageLog& log, ExecutionMode exec = ExecutionMode::Serial,
                      AccessAudit* audit = nullptr);

}  // namespace advot
