#include "advot/otsolve.hpp"

#include <algorithm>
#include <cmath>

#include "advot/error.hpp"

namespace advot {

namespace {

kernels::NetworkView view_of(const BipartiteNetwork& network) {
  return {network.edge_sources(), network.row_offsets()};
}

void check_prices(const DualPrices& prices, const BipartiteNetwork& network) {
  if (prices.values.size() != network.num_sources()) {
    throw Error(ErrorCode::DimensionMismatch, "prices: expected one value per source");
  }
}

}  // namespace

void validate_settings(const SolverSettings& settings, bool allow_zero_lambda) {
  if (settings.lambda == 0.0 && !allow_zero_lambda) {
    throw Error(ErrorCode::ZeroLambda, "lambda = 0 needs the unregularized solver");
  }
  if (!(settings.lambda >= 0.0) || !std::isfinite(settings.lambda)) {
    throw Error(ErrorCode::InvalidParameter, "lambda must be >= 0");
  }
  if (!(settings.gamma > 0.0) || !std::isfinite(settings.gamma)) {
    throw Error(ErrorCode::InvalidParameter, "gamma must be > 0");
  }
  if (!(settings.tol > 0.0)) throw Error(ErrorCode::InvalidParameter, "tol must be > 0");
  if (settings.max_iter <= 0) throw Error(ErrorCode::InvalidParameter, "max_iter must be > 0");
}

TransportPlan primal_update(const BipartiteNetwork& network, const PerceptionWeights& weights,
                            const DualPrices& prices, double lambda, ExecutionMode exec) {
  if (!(lambda > 0.0)) throw Error(ErrorCode::ZeroLambda, "primal update needs lambda > 0");
  validate_weights(weights, network);
  check_prices(prices, network);
  TransportPlan plan{EdgeValues(network.num_edges())};
  kernels::primal_update(exec, weights.values, prices.values, view_of(network), lambda,
                         plan.rates);
  return plan;
}

DualPrices dual_update(const DualPrices& prices, const TransportPlan& plan,
                       const BipartiteNetwork& network, double gamma) {
  check_prices(prices, network);
  DualPrices next = prices;
  const auto sums = row_sums(plan, network);
  kernels::serial::dual_update(next.values, sums, network.capacities(), gamma);
  return next;
}

double complementarity_residual(const BipartiteNetwork& network, const TransportPlan& plan,
                                const DualPrices& prices) {
  check_prices(prices, network);
  const auto sums = row_sums(plan, network);
  double r = 0.0;
  for (std::size_t j = 0; j < sums.size(); ++j) {
    r = std::max(r, std::abs(std::min(prices.values[j], network.capacity(j) - sums[j])));
  }
  return r;
}

SolveReport solve_regularized_ot(const BipartiteNetwork& network, const PerceptionWeights& weights,
                                 const SolverSettings& settings,
                                 const std::optional<DualPrices>& warm_start) {
  validate_settings(settings);
  validate_weights(weights, network);

  const std::size_t n_edges = network.num_edges();
  const std::size_t n_sources = network.num_sources();
  const auto net = view_of(network);
  const auto caps = network.capacities();

  std::vector<double> prices(n_sources, 0.0);
  if (warm_start) {
    check_prices(*warm_start, network);
    prices = warm_start->values;
  }
  std::vector<double> rates(n_edges, 0.0);
  std::vector<double> next(n_edges, 0.0);
  std::vector<double> sums(n_sources, 0.0);

  SolveReport report;
  for (int k = 1; k <= settings.max_iter; ++k) {
    kernels::primal_update(settings.exec, weights.values, prices, net, settings.lambda, next);
    kernels::row_sums(settings.exec, next, net, sums);

    double compl_res = 0.0;
    for (std::size_t j = 0; j < n_sources; ++j) {
      compl_res = std::max(compl_res, std::abs(std::min(prices[j], caps[j] - sums[j])));
    }
    double change = 0.0;
    for (std::size_t e = 0; e < n_edges; ++e) change = std::max(change, std::abs(next[e] - rates[e]));

    kernels::dual_update(settings.exec, prices, sums, caps, settings.gamma);
    rates.swap(next);

    report.iterations = k;
    report.residual = std::max(compl_res, change);
    if (settings.record_trace) {
      report.trace.push_back(
          {k, prices, report.residual, planner_objective({rates}, weights, settings.lambda)});
    }
    if (!std::isfinite(report.residual)) break;
    if (report.residual <= settings.tol) {
      report.converged = true;
      break;
    }
  }
  report.plan.rates = std::move(rates);
  report.prices.values = std::move(prices);
  return report;
}

TransportPlan unregularized_solve(const BipartiteNetwork& network,
                                  const PerceptionWeights& weights) {
  validate_weights(weights, network);
  TransportPlan plan{EdgeValues(network.num_edges(), 0.0)};
  for (std::size_t j = 0; j < network.num_sources(); ++j) {
    std::size_t best = network.row_begin(j);
    for (std::size_t e = best + 1; e < network.row_end(j); ++e) {
      if (weights.values[e] > weights.values[best]) best = e;
    }
    if (weights.values[best] > 0.0) plan.rates[best] = network.capacity(j);
  }
  return plan;
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

double planner_objective(const TransportPlan& plan, const PerceptionWeights& weights,
                         double lambda) {
  if (plan.rates.size() != weights.values.size()) {
    throw Error(ErrorCode::DimensionMismatch, "plan and weights differ in length");
  }
  double total = 0.0;
  for (std::size_t e = 0; e < plan.rates.size(); ++e) {
    total += weights.values[e] * plan.rates[e] - lambda * xlogx(plan.rates[e]);
  }
  return total;
}

double dual_objective(const BipartiteNetwork& network, const PerceptionWeights& weights,
                      const DualPrices& prices, double lambda) {
  const TransportPlan x = primal_update(network, weights, prices, lambda);
  double g = 0.0;
  for (double r : x.rates) g += lambda * r;
  for (std::size_t j = 0; j < network.num_sources(); ++j) g += prices.values[j] * network.capacity(j);
  return g;
}

}  // namespace advot
