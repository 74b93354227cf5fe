#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <cmath>
#include <random>

#include "advot/error.hpp"
#include "advot/otsolve.hpp"
#include "support.hpp"

using namespace advot;

namespace {

BipartiteNetwork one_edge(double capacity) {
  const std::vector<EdgeSpec> e{{"s", "q"}};
  return build_network({"s"}, {"q"}, e, {capacity});
}

// Independent oracle: the problem separates per source; each row's price is the
// root of sum_q exp((m - p)/lambda - 1) = c (or 0 when the row is slack),
// found by plain bisection.
TransportPlan bisection_oracle(const BipartiteNetwork& net, const PerceptionWeights& w,
                               double lambda) {
  TransportPlan plan{EdgeValues(net.num_edges())};
  for (std::size_t j = 0; j < net.num_sources(); ++j) {
    auto row = [&](double p) {
      double s = 0.0;
      for (std::size_t e = net.row_begin(j); e < net.row_end(j); ++e) {
        s += std::exp((w.values[e] - p) / lambda - 1.0);
      }
      return s;
    };
    double price = 0.0;
    if (row(0.0) > net.capacity(j)) {
      double lo = 0.0, hi = 1.0;
      while (row(hi) > net.capacity(j)) hi *= 2.0;
      for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (row(mid) > net.capacity(j) ? lo : hi) = mid;
      }
      price = 0.5 * (lo + hi);
    }
    for (std::size_t e = net.row_begin(j); e < net.row_end(j); ++e) {
      plan.rates[e] = std::exp((w.values[e] - price) / lambda - 1.0);
    }
  }
  return plan;
}

}  // namespace

TEST_CASE("primal_update: closed-form examples") {
  const auto net = one_edge(10.0);
  CHECK(primal_update(net, {{0.0}}, {{0.0}}, 1.0).rates[0] == doctest::Approx(std::exp(-1.0)));
  CHECK(primal_update(net, {{1.0}}, {{1.0}}, 3.0).rates[0] == doctest::Approx(0.367879).epsilon(1e-6));

  const auto ref = test::reference_network();
  const auto x = primal_update(ref, test::reference_weights(), {{2.0, 0.0}}, 3.0);
  for (std::size_t e = 0; e < 3; ++e) {
    CHECK(x.rates[e] == doctest::Approx(test::frozen::primal_row_2_over_3[e]).epsilon(1e-14));
  }
}

TEST_CASE("dual_update: examples") {
  const auto net = one_edge(2.0);
  CHECK(dual_update({{0.0}}, {{2.0}}, net, 0.1).values[0] == 0.0);
  CHECK(dual_update({{0.0}}, {{3.0}}, net, 0.1).values[0] == doctest::Approx(0.1));
  CHECK(dual_update({{0.05}}, {{1.0}}, net, 0.1).values[0] == 0.0);
}

TEST_CASE("solve_regularized_ot: 1x1 closed forms") {
  SolverSettings s;
  s.lambda = 1.0;
  const auto slack = solve_regularized_ot(one_edge(10.0), {{0.0}}, s);
  REQUIRE(slack.converged);
  CHECK(slack.plan.rates[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-9));
  CHECK(slack.prices.values[0] == 0.0);

  const auto binding = solve_regularized_ot(one_edge(0.1), {{0.0}}, s);
  REQUIRE(binding.converged);
  CHECK(binding.plan.rates[0] == doctest::Approx(0.1).epsilon(1e-7));
  CHECK(binding.prices.values[0] ==
        doctest::Approx(test::frozen::binding_price_1x1).epsilon(1e-6));
}

TEST_CASE("solve_regularized_ot: reference scenario against frozen oracle") {
  const auto net = test::reference_network();
  SolverSettings s;
  s.record_trace = true;
  const auto t0 = std::chrono::steady_clock::now();
  const auto r = solve_regularized_ot(net, test::reference_weights(), s);
  const double seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  REQUIRE(r.converged);
  CHECK(r.residual <= s.tol);
  CHECK(seconds < 1.0);
  CHECK(max_abs_diff(r.plan.rates, test::frozen::ot_plan) <= 1e-4);
  CHECK(max_abs_diff(r.prices.values, test::frozen::ot_prices) <= 1e-4);
  CHECK(planner_objective(r.plan, test::reference_weights(), 3.0) ==
        doctest::Approx(test::frozen::ot_true_utility).epsilon(1e-8));
  CHECK(static_cast<int>(r.trace.size()) == r.iterations);
  for (const auto& rec : r.trace) {
    for (double p : rec.prices) CHECK(p >= 0.0);
  }

  SUBCASE("KKT conditions") {
    const auto& w = test::reference_weights().values;
    for (std::size_t e = 0; e < net.num_edges(); ++e) {
      const double p = r.prices.values[net.edge(e).source];
      CHECK(r.plan.rates[e] > 0.0);
      CHECK(std::abs(w[e] - 3.0 * (1.0 + std::log(r.plan.rates[e])) - p) <= 10 * s.tol);
    }
    const auto feas = feasibility_check(r.plan, net, s.tol);
    CHECK(feas.feasible);
    for (std::size_t j = 0; j < net.num_sources(); ++j) {
      CHECK(r.prices.values[j] * feas.slack[j] <= 10 * s.tol);
    }
  }
}

TEST_CASE("solve_regularized_ot: randomized 1x1 and 2x2 against bisection oracle") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> weight(0.0, 5.0);
  std::uniform_real_distribution<double> cap(0.5, 5.0);
  for (double lambda : {0.5, 1.0, 3.0}) {
    for (int trial = 0; trial < 40; ++trial) {
      const bool square = trial % 2 == 1;
      const auto net = square ? fully_connected({"a", "b"}, {"x", "y"}, {cap(rng), cap(rng)})
                              : one_edge(cap(rng));
      PerceptionWeights w{EdgeValues(net.num_edges())};
      for (double& v : w.values) v = weight(rng);
      SolverSettings s;
      s.lambda = lambda;
      const auto r = solve_regularized_ot(net, w, s);
      CAPTURE(lambda);
      CAPTURE(trial);
      REQUIRE(r.converged);
      CHECK(max_abs_diff(r.plan.rates, bisection_oracle(net, w, lambda).rates) <= 1e-4);
    }
  }
}

TEST_CASE("dual iterates decrease the Lagrangian dual and the objective converges") {
  // Starting from p = 0 the unconstrained maximizer overshoots the capacities,
  // so planner_objective falls toward the constrained optimum; the dual
  // function is the quantity that moves monotonically under small steps.
  const auto net = test::reference_network();
  const auto w = test::reference_weights();
  SolverSettings s;
  s.gamma = 0.01;
  s.record_trace = true;
  const auto r = solve_regularized_ot(net, w, s);
  REQUIRE(r.converged);
  double previous = dual_objective(net, w, {{0.0, 0.0}}, s.lambda);
  for (const auto& rec : r.trace) {
    const double g = dual_objective(net, w, {rec.prices}, s.lambda);
    CHECK(g <= previous + 1e-12);
    previous = g;
  }
  const double optimum = test::frozen::ot_true_utility;
  CHECK(std::abs(r.trace.back().objective - optimum) <= 1e-6);
  CHECK(std::abs(previous - optimum) <= 1e-6);  // zero duality gap
}

TEST_CASE("unregularized_solve: examples") {
  const auto net = test::reference_network();
  CHECK(unregularized_solve(net, test::reference_weights()).rates == test::frozen::lp_plan);

  const auto row = fully_connected({"s"}, {"a", "b"}, {2.0});
  CHECK(unregularized_solve(row, {{1.5, 1.5}}).rates == std::vector<double>{2.0, 0.0});

  CHECK(unregularized_solve(net, {{-1, -2, -3, -1, -1, -1}}).rates == std::vector<double>(6, 0.0));
}

TEST_CASE("planner_objective: examples") {
  CHECK(planner_objective({{0.0, 0.0}}, {{3.0, 4.0}}, 3.0) == 0.0);
  CHECK(planner_objective({{1.0}}, {{2.0}}, 3.0) == doctest::Approx(2.0));
  CHECK(planner_objective({{std::exp(1.0)}}, {{0.0}}, 1.0) == doctest::Approx(-std::exp(1.0)));
  CHECK(xlogx(0.0) == 0.0);
}

TEST_CASE("lambda = 0 is rejected by the regularized path") {
  SolverSettings s;
  s.lambda = 0.0;
  const auto net = test::reference_network();
  CHECK_THROWS_AS(solve_regularized_ot(net, test::reference_weights(), s), Error);
  try {
    primal_update(net, test::reference_weights(), {{0.0, 0.0}}, 0.0);
    FAIL("expected ZeroLambda");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroLambda);
  }
  CHECK_NOTHROW(validate_settings(s, true));
}

TEST_CASE("max_iter exhaustion reports not converged") {
  SolverSettings s;
  s.max_iter = 3;
  const auto r = solve_regularized_ot(test::reference_network(), test::reference_weights(), s);
  CHECK_FALSE(r.converged);
  CHECK(r.iterations == 3);
  CHECK(r.residual > s.tol);
}

TEST_CASE("warm start at the optimum converges immediately") {
  const auto net = test::reference_network();
  SolverSettings s;
  const auto cold = solve_regularized_ot(net, test::reference_weights(), s);
  const auto warm = solve_regularized_ot(net, test::reference_weights(), s, cold.prices);
  CHECK(warm.converged);
  CHECK(warm.iterations < 5);
  CHECK(max_abs_diff(warm.plan.rates, cold.plan.rates) <= 1e-8);
}
