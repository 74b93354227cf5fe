#include "advot/bayes_static.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "advot/error.hpp"

namespace advot {

namespace {

std::vector<OffenderType> uniform_profile(std::size_t n, OffenderType t) {
  return std::vector<OffenderType>(n, t);
}

// Utility change from moving one rate from `from` to `to` under weight w.
double rate_gain(double weight, double lambda, double from, double to) {
  return weight * (to - from) - lambda * (xlogx(to) - xlogx(from));
}

// Evenly spaced points over [lo, hi] plus a window of half-width `window`
// around `center`, clipped to [lo, hi].
template <typename Visit>
void sample_range(double lo, double hi, double center, double window, int points, Visit&& visit) {
  if (hi < lo) return;
  const int n = std::max(points, 2);
  for (int k = 0; k < n; ++k) visit(lo + (hi - lo) * k / (n - 1));
  const double a = std::max(lo, center - window);
  const double b = std::min(hi, center + window);
  for (int k = 0; k < n; ++k) visit(a + (b - a) * k / (n - 1));
}

}  // namespace

void validate_game(const GameSpec& game) {
  validate_weights(game.weights, game.network);
  validate_bounds(game.bounds, game.network.num_targets());
  validate_cost_params(game.cost, game.network);
  if (game.belief.num_targets() != game.network.num_targets()) {
    throw Error(ErrorCode::DimensionMismatch, "belief: expected one entry per target");
  }
  validate_settings(game.settings);
}

PerceptionWeights effective_weights(const BipartiteNetwork& network,
                                    const PerceptionWeights& weights,
                                    const AdversaryStrategy& strategy, const BeliefState& belief) {
  validate_weights(weights, network);
  if (strategy.num_targets() != network.num_targets() ||
      belief.num_targets() != network.num_targets()) {
    throw Error(ErrorCode::DimensionMismatch, "strategy/belief size differs from target count");
  }
  PerceptionWeights out = weights;
  for (std::size_t e = 0; e < network.num_edges(); ++e) {
    const std::size_t q = network.edge(e).target;
    for (OffenderType t : kOffenderTypes) {
      out.values[e] += belief.prob(q, t) * type_value(t) * strategy.at(q, t);
    }
  }
  return out;
}

double dispatcher_expected_utility(const BipartiteNetwork& network, const TransportPlan& plan,
                                   const PerceptionWeights& weights,
                                   const AdversaryStrategy& strategy, const BeliefState& belief,
                                   double lambda) {
  return planner_objective(plan, effective_weights(network, weights, strategy, belief), lambda);
}

double realized_utility(const TransportPlan& plan, const PerceptionWeights& weights,
                        double lambda) {
  return planner_objective(plan, weights, lambda);
}

SolveReport dispatcher_best_response(const GameSpec& game, const AdversaryStrategy& strategy,
                                     const std::optional<DualPrices>& warm_start) {
  return solve_regularized_ot(
      game.network, effective_weights(game.network, game.weights, strategy, game.belief),
      game.settings, warm_start);
}

double adversary_cost(const BipartiteNetwork& network, const TransportPlan& plan,
                      const PerceptionWeights& weights, const AdversaryStrategy& strategy,
                      std::span<const OffenderType> types, const AdversaryCostParams& params) {
  validate_cost_params(params, network);
  validate_weights(weights, network);
  if (plan.rates.size() != network.num_edges() || types.size() != network.num_targets() ||
      strategy.num_targets() != network.num_targets()) {
    throw Error(ErrorCode::DimensionMismatch, "adversary cost inputs differ in size");
  }
  double total = 0.0;
  for (std::size_t e = 0; e < network.num_edges(); ++e) {
    const std::size_t q = network.edge(e).target;
    const double xi = strategy.at(q, types[q]);
    if (!(xi >= kPerturbationFloor)) {
      throw Error(ErrorCode::PerturbationBelowFloor,
                  "perturbation at target '" + network.target_id(q) + "' below floor");
    }
    const double x = plan.rates[e];
    total += params.punishment[e] * std::pow(xi, -params.beta2) * std::pow(x, params.beta1) +
             (weights.values[e] + type_value(types[q]) * xi) * x;
  }
  return total;
}

TargetTerms target_terms(const BipartiteNetwork& network, const TransportPlan& plan,
                         const AdversaryCostParams& params, ExecutionMode exec) {
  if (plan.rates.size() != network.num_edges() ||
      params.punishment.size() != network.num_edges()) {
    throw Error(ErrorCode::DimensionMismatch, "plan/punishment must have one entry per edge");
  }
  TargetTerms terms{std::vector<double>(network.num_targets()),
                    std::vector<double>(network.num_targets())};
  kernels::target_aggregates(exec, plan.rates, params.punishment, params.beta1,
                             network.incoming_offsets(), network.incoming_edges(),
                             terms.penalty_mass, terms.flow);
  return terms;
}

double node_cost(double xi, double penalty_mass, double linear_coeff, double beta2) {
  return penalty_mass * std::pow(xi, -beta2) + linear_coeff * xi;
}

double node_cost_derivative(double xi, double penalty_mass, double linear_coeff, double beta2) {
  return -beta2 * penalty_mass * std::pow(xi, -beta2 - 1.0) + linear_coeff;
}

double node_best_response(double penalty_mass, double linear_coeff, double beta2, double lo,
                          double hi) {
  if (!(linear_coeff > 0.0)) return hi;
  const double stationary = std::pow(beta2 * penalty_mass / linear_coeff, 1.0 / (1.0 + beta2));
  return std::clamp(stationary, lo, hi);
}

std::vector<double> adversary_best_response(const BipartiteNetwork& network,
                                            const TransportPlan& plan,
                                            const AdversaryCostParams& params,
                                            const AdversaryBounds& bounds, OffenderType type,
                                            ExecutionMode exec) {
  validate_bounds(bounds, network.num_targets());
  const TargetTerms terms = target_terms(network, plan, params, exec);
  std::vector<double> xi(network.num_targets());
  for (std::size_t q = 0; q < xi.size(); ++q) {
    xi[q] = node_best_response(terms.penalty_mass[q], type_value(type) * terms.flow[q],
                               params.beta2, kPerturbationFloor, bounds.cap(q, type));
  }
  return xi;
}

AdversaryStrategy adversary_best_response(const BipartiteNetwork& network,
                                          const TransportPlan& plan,
                                          const AdversaryCostParams& params,
                                          const AdversaryBounds& bounds, ExecutionMode exec) {
  return {adversary_best_response(network, plan, params, bounds, OffenderType::Minor, exec),
          adversary_best_response(network, plan, params, bounds, OffenderType::Major, exec)};
}

DeviationReport deviation_check(const GameSpec& game, const TransportPlan& plan,
                                const AdversaryStrategy& strategy, int grid_points) {
  const auto& net = game.network;
  const double lambda = game.settings.lambda;
  const PerceptionWeights eff = effective_weights(net, game.weights, strategy, game.belief);
  const auto sums = row_sums(plan, net);
  constexpr double kWindow = 0.01;

  DeviationReport report;
  report.dispatcher_gap = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < net.num_sources(); ++j) {
    for (std::size_t e = net.row_begin(j); e < net.row_end(j); ++e) {
      const double x = plan.rates[e];
      const double hi = std::max(0.0, net.capacity(j) - (sums[j] - x));
      sample_range(0.0, hi, x, kWindow * std::max(hi, x), grid_points, [&](double v) {
        report.dispatcher_gap =
            std::max(report.dispatcher_gap, rate_gain(eff.values[e], lambda, x, v));
      });
      for (std::size_t f = net.row_begin(j); f < net.row_end(j); ++f) {
        if (f == e) continue;
        const double y = plan.rates[f];
        sample_range(0.0, x, 0.0, kWindow * x, grid_points, [&](double t) {
          const double gain = rate_gain(eff.values[e], lambda, x, x - t) +
                              rate_gain(eff.values[f], lambda, y, y + t);
          report.dispatcher_gap = std::max(report.dispatcher_gap, gain);
        });
      }
    }
  }

  report.adversary_gap = -std::numeric_limits<double>::infinity();
  const TargetTerms terms = target_terms(net, plan, game.cost);
  for (std::size_t q = 0; q < net.num_targets(); ++q) {
    for (OffenderType t : kOffenderTypes) {
      const double a = terms.penalty_mass[q];
      const double b = type_value(t) * terms.flow[q];
      const double xi = strategy.at(q, t);
      const double lo = kPerturbationFloor;
      const double hi = game.bounds.cap(q, t);
      const double base = node_cost(xi, a, b, game.cost.beta2);
      sample_range(lo, hi, xi, kWindow * (hi - lo), grid_points, [&](double v) {
        report.adversary_gap =
            std::max(report.adversary_gap, base - node_cost(v, a, b, game.cost.beta2));
      });
    }
  }
  report.gap = std::max(report.dispatcher_gap, report.adversary_gap);
  return report;
}

namespace detail {

EquilibriumProfile alternate(const GameSpec& game, AdversaryStrategy initial,
                             const EquilibriumOptions& options, const AlternationHooks& hooks) {
  validate_game(game);
  validate_strategy(initial, game.bounds);
  if (options.max_rounds <= 0 || !(options.tol > 0.0)) {
    throw Error(ErrorCode::InvalidParameter, "max_rounds and tol must be positive");
  }
  SolverSettings inner = game.settings;
  inner.record_trace = false;

  const SolveReport free = solve_regularized_ot(game.network, game.weights, inner);
  EquilibriumProfile profile;
  profile.plan = free.plan;
  profile.prices = free.prices;
  profile.strategy = std::move(initial);

  for (int r = 1; r <= options.max_rounds; ++r) {
    SolveReport rep =
        solve_regularized_ot(game.network, hooks.weights_for(profile.strategy), inner,
                             profile.prices);
    profile.rounds = r;
    if (!rep.converged) {
      profile.last_change = std::numeric_limits<double>::infinity();
      break;
    }
    AdversaryStrategy next = hooks.respond(rep.plan);
    const double change = std::max({max_abs_diff(rep.plan.rates, profile.plan.rates),
                                    max_abs_diff(next.minor, profile.strategy.minor),
                                    max_abs_diff(next.major, profile.strategy.major)});
    profile.plan = std::move(rep.plan);
    profile.prices = std::move(rep.prices);
    profile.strategy = std::move(next);
    profile.last_change = change;
    if (options.record_trace) profile.trace.push_back(hooks.record(r, profile.plan, profile.strategy));
    if (change <= options.tol) {
      profile.rounds_converged = true;
      break;
    }
  }
  return profile;
}

}  // namespace detail

EquilibriumProfile solve_bayesian_equilibrium(const GameSpec& game,
                                              const EquilibriumOptions& options) {
  const auto& net = game.network;
  const std::size_t n_targets = net.num_targets();
  detail::AlternationHooks hooks;
  hooks.weights_for = [&](const AdversaryStrategy& xi) {
    return effective_weights(net, game.weights, xi, game.belief);
  };
  hooks.respond = [&](const TransportPlan& plan) {
    return adversary_best_response(net, plan, game.cost, game.bounds, game.settings.exec);
  };
  hooks.record = [&](int round, const TransportPlan& plan, const AdversaryStrategy& xi) {
    RoundRecord rec;
    rec.round = round;
    rec.rates = plan.rates;
    rec.xi_minor = xi.minor;
    rec.xi_major = xi.major;
    rec.dispatcher_utility = dispatcher_expected_utility(net, plan, game.weights, xi,
                                                         game.belief, game.settings.lambda);
    rec.adversary_cost_minor = adversary_cost(net, plan, game.weights, xi,
                                              uniform_profile(n_targets, OffenderType::Minor),
                                              game.cost);
    rec.adversary_cost_major = adversary_cost(net, plan, game.weights, xi,
                                              uniform_profile(n_targets, OffenderType::Major),
                                              game.cost);
    return rec;
  };

  EquilibriumProfile profile =
      detail::alternate(game, AdversaryStrategy::at_caps(game.bounds), options, hooks);
  if (std::isfinite(profile.last_change)) {
    profile.deviation = deviation_check(game, profile.plan, profile.strategy, options.grid_points);
    profile.converged =
        profile.rounds_converged && profile.deviation.gap <= options.deviation_eps;
  }
  return profile;
}

}  // namespace advot
