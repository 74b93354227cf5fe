#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "advot/distributed.hpp"
#include "advot/error.hpp"
#include "support.hpp"

using namespace advot;

namespace {

Schedule async_schedule(std::uint64_t seed, double activation = 0.5) {
  Schedule s;
  s.mode = ScheduleMode::RandomSubset;
  s.activation = activation;
  s.seed = seed;
  return s;
}

const EquilibriumProfile& reference_equilibrium() {
  static const EquilibriumProfile p = solve_bayesian_equilibrium(test::reference_game());
  return p;
}

}  // namespace

TEST_CASE("agent_tick: slack agent keeps a zero price") {
  const SourceAgent agent("src:a", 100.0, {"tgt:x", "tgt:y"}, {1.0, 2.0});
  const auto next = agent_tick(agent, {1.0, 2.0}, 0.05, 3.0);
  CHECK(next.price() == 0.0);
  CHECK(next.rates()[0] == doctest::Approx(std::exp(1.0 / 3.0 - 1.0)));
  CHECK(next.rates()[1] == doctest::Approx(std::exp(2.0 / 3.0 - 1.0)));
}

TEST_CASE("agent_tick: overloaded agent raises its price by gamma times the excess") {
  const SourceAgent agent("src:a", 0.5, {"tgt:x", "tgt:y"}, {3.0, 3.0});
  const auto next = agent_tick(agent, {3.0, 3.0}, 0.05, 3.0);
  // x = exp(0) = 1 on both edges, excess 1.5
  CHECK(next.price() == doctest::Approx(0.05 * 1.5));
  CHECK(next.price() > agent.price());
}

TEST_CASE("agent_tick: no-op at the centralized fixed point") {
  // source s2 of the reference network, whose constraint binds
  SourceAgent agent("src:s2", 3.0, {"tgt:q1", "tgt:q2", "tgt:q3"}, {2.0, 5.0, 1.0});
  for (int i = 0; i < 50000 && !(agent.residual() <= 1e-12); ++i) {
    agent = agent_tick(agent, {2.0, 5.0, 1.0}, 0.05, 3.0);
  }
  CHECK(agent.price() == doctest::Approx(test::frozen::ot_prices[1]).epsilon(1e-9));
  for (std::size_t k = 0; k < 3; ++k) {
    CHECK(agent.rates()[k] == doctest::Approx(test::frozen::ot_plan[3 + k]).epsilon(1e-9));
  }
  const auto again = agent_tick(agent, {2.0, 5.0, 1.0}, 0.05, 3.0);
  CHECK(std::abs(again.price() - agent.price()) <= 1e-8);
  CHECK(max_abs_diff(again.rates(), agent.rates()) <= 1e-8);

  CHECK_THROWS_AS(agent_tick(agent, {2.0, 5.0, 1.0}, 0.05, 0.0), Error);
}

TEST_CASE("synchronous schedule reproduces the centralized solver tick for tick") {
  const auto net = test::reference_network();
  SolverSettings settings;
  settings.record_trace = true;
  const auto central = solve_regularized_ot(net, test::reference_weights(), settings);
  Schedule sync;
  sync.mode = ScheduleMode::Synchronous;
  const auto run = run_distributed(net, test::reference_weights(), settings, sync);
  CHECK(run.report == central);
  REQUIRE(run.ticks.size() == central.trace.size());
  for (std::size_t k = 0; k < run.ticks.size(); ++k) {
    CHECK(run.ticks[k].prices == central.trace[k].prices);
  }
}

TEST_CASE("synchronous game: ticks before the first adversary message follow plain OT") {
  const auto game = test::reference_game();
  SolverSettings settings = game.settings;
  settings.record_trace = true;
  const auto central = solve_regularized_ot(game.network, game.weights, settings);
  Schedule sync;
  sync.mode = ScheduleMode::Synchronous;
  const auto run = run_distributed(game, sync);
  REQUIRE(run.ticks.size() > static_cast<std::size_t>(sync.adversary_period));
  for (int k = 0; k < sync.adversary_period; ++k) {
    CHECK(run.ticks[k].prices == central.trace[k].prices);
  }
  CHECK(run.ticks[sync.adversary_period].prices != central.trace[sync.adversary_period].prices);
  CHECK(run.report.converged);
  CHECK(max_abs_diff(run.report.plan.rates, reference_equilibrium().plan.rates) <= 1e-3);
}

TEST_CASE("random-subset runs converge to the centralized equilibrium") {
  const auto& eq = reference_equilibrium();
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const auto run = run_distributed(test::reference_game(), async_schedule(seed));
    CAPTURE(seed);
    REQUIRE(run.report.converged);
    CHECK(max_abs_diff(run.report.plan.rates, eq.plan.rates) <= 1e-3);
    REQUIRE(run.strategy.has_value());
    CHECK(max_abs_diff(run.strategy->minor, eq.strategy.minor) <= 1e-3);
    CHECK(max_abs_diff(run.strategy->major, eq.strategy.major) <= 1e-3);
    for (const auto& t : run.ticks) {
      for (double p : t.prices) REQUIRE(p >= 0.0);
    }
  }
}

TEST_CASE("limit does not depend on the schedule") {
  const auto& eq = reference_equilibrium();
  std::vector<Schedule> schedules = {async_schedule(3, 0.1), async_schedule(4, 0.25),
                                     async_schedule(5, 0.9)};
  Schedule rr;
  rr.mode = ScheduleMode::RoundRobin;
  schedules.push_back(rr);
  for (const Schedule& s : schedules) {
    const auto run = run_distributed(test::reference_game(), s);
    CAPTURE(s.activation);
    REQUIRE(run.report.converged);
    CHECK(max_abs_diff(run.report.plan.rates, eq.plan.rates) <= 1e-3);
  }
}

TEST_CASE("single-source network matches the centralized solve") {
  const auto net = fully_connected({"s"}, {"a", "b", "c"}, {2.0});
  const PerceptionWeights w{{1.0, 4.0, 2.0}};
  SolverSettings settings;
  settings.record_trace = true;
  const auto central = solve_regularized_ot(net, w, settings);
  for (ScheduleMode mode : {ScheduleMode::Synchronous, ScheduleMode::RoundRobin}) {
    Schedule s;
    s.mode = mode;
    s.gamma = settings.gamma;
    CHECK(run_distributed(net, w, settings, s).report == central);
  }
  const auto async = run_distributed(net, w, settings, async_schedule(9));
  REQUIRE(async.report.converged);
  CHECK(max_abs_diff(async.report.plan.rates, central.plan.rates) <= 1e-6);
}

TEST_CASE("replay reproduces every message") {
  const auto run = run_distributed(test::reference_game(), async_schedule(42));
  for (ExecutionMode exec : {ExecutionMode::Serial, ExecutionMode::Parallel}) {
    const auto again = replay(run.log, exec);
    CHECK(again.report == run.report);
    CHECK(again.ticks == run.ticks);
    CHECK(again.log.to_string() == run.log.to_string());
  }

  // through the text encoding as well
  std::stringstream text;
  run.log.write(text);
  const auto parsed = MessageLog::read(text);
  CHECK(parsed == run.log);
  CHECK(replay(parsed).report.plan == run.report.plan);
}

TEST_CASE("parallel ticks give the same log") {
  Schedule s = async_schedule(7);
  const auto serial = run_distributed(test::reference_game(), s);
  s.exec = ExecutionMode::Parallel;
  const auto parallel = run_distributed(test::reference_game(), s);
  CHECK(serial.log == parallel.log);
}

TEST_CASE("corrupted logs are rejected") {
  const auto run = run_distributed(test::reference_game(), async_schedule(2));
  const std::string text = run.log.to_string();
  auto code_of = [](auto&& f) {
    try {
      f();
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoError;
  };

  // truncated: drop the last lines
  const std::string truncated = text.substr(0, text.rfind('\n', text.size() - 2) + 1);
  CHECK(code_of([&] { MessageLog::from_string(truncated); }) == ErrorCode::CorruptLog);
  CHECK(code_of([&] { MessageLog::from_string(text.substr(0, text.size() / 2)); }) ==
        ErrorCode::CorruptLog);
  CHECK(code_of([&] { MessageLog::from_string("not json\n"); }) == ErrorCode::CorruptLog);
  CHECK(code_of([&] { MessageLog::from_string(""); }) == ErrorCode::CorruptLog);

  // well-formed but altered: one rate changes
  MessageLog tampered;
  bool changed = false;
  for (Message m : run.log.records()) {
    if (!changed && m.kind == "rates" && m.tick > 5) {
      m.values[0] += 1e-9;
      changed = true;
    }
    tampered.append(m);
  }
  REQUIRE(changed);
  CHECK(code_of([&] { replay(tampered); }) == ErrorCode::CorruptLog);

  // missing activation record
  MessageLog missing;
  bool dropped = false;
  for (const Message& m : run.log.records()) {
    if (!dropped && m.kind == "activate" && m.tick == 3) {
      dropped = true;
      continue;
    }
    missing.append(m);
  }
  CHECK(code_of([&] { replay(missing); }) == ErrorCode::CorruptLog);
}

TEST_CASE("same seed gives the same log, other seeds differ") {
  const auto a = run_distributed(test::reference_game(), async_schedule(42));
  const auto b = run_distributed(test::reference_game(), async_schedule(42));
  const auto c = run_distributed(test::reference_game(), async_schedule(43));
  CHECK(a.log.to_string() == b.log.to_string());
  CHECK(a.log.to_string() != c.log.to_string());
}

TEST_CASE("agents only touch their own state") {
  AccessAudit audit;
  const auto run = run_distributed(test::reference_game(), async_schedule(11), &audit);
  CHECK(run.report.converged);
  CHECK(audit.accesses() > 0);
  CHECK(audit.violations().empty());

  AccessAudit replay_audit;
  replay(run.log, ExecutionMode::Parallel, &replay_audit);
  CHECK(replay_audit.violations().empty());

  // the audit does catch a cross-agent read
  AccessAudit probe;
  SourceAgent a("src:a", 1.0, {"tgt:x"}, {1.0}, &probe);
  SourceAgent b("src:b", 1.0, {"tgt:x"}, {1.0}, &probe);
  {
    AccessAudit::Scope scope(a.key());
    (void)a.price();
    (void)b.price();
  }
  const auto v = probe.violations();
  REQUIRE(v.size() == 1);
  CHECK(v[0].context == "src:a");
  CHECK(v[0].owner == "src:b");
}

TEST_CASE("schedule validation and parsing") {
  CHECK(parse_schedule_mode("sync") == ScheduleMode::Synchronous);
  CHECK(parse_schedule_mode("async") == ScheduleMode::RandomSubset);
  CHECK(parse_schedule_mode("roundrobin") == ScheduleMode::RoundRobin);
  CHECK_THROWS_AS(parse_schedule_mode("eventually"), Error);
  for (ScheduleMode m :
       {ScheduleMode::Synchronous, ScheduleMode::RandomSubset, ScheduleMode::RoundRobin}) {
    CHECK(parse_schedule_mode(to_string(m)) == m);
  }
  Schedule bad = async_schedule(1, 0.0);
  CHECK_THROWS_AS(validate_schedule(bad), Error);
  bad = async_schedule(1);
  bad.adversary_period = 0;
  CHECK_THROWS_AS(validate_schedule(bad), Error);
}

TEST_CASE("tick budget exhaustion is reported") {
  Schedule s = async_schedule(1);
  s.max_ticks = 20;
  const auto run = run_distributed(test::reference_game(), s);
  CHECK_FALSE(run.report.converged);
  CHECK(run.report.iterations == 20);
  CHECK(run.ticks.size() == 20);
  CHECK(replay(run.log).report == run.report);
}
