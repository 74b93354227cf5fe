#include "advot/bayes_dynamic.hpp"

#include <algorithm>
#include <cmath>

#include "advot/error.hpp"

namespace advot {

double threshold_phi(double xi_t, double xi_prev, double tau) {
  return xi_t < xi_prev + tau ? xi_prev : xi_t - tau;
}

AdversaryStrategy apply_threshold(const AdversaryStrategy& raw, const AdversaryStrategy& previous,
                                  double tau) {
  if (raw.num_targets() != previous.num_targets()) {
    throw Error(ErrorCode::DimensionMismatch, "raw and previous actions differ in size");
  }
  AdversaryStrategy out = raw;
  for (std::size_t q = 0; q < raw.num_targets(); ++q) {
    for (OffenderType t : kOffenderTypes) {
      out.at(q, t) = threshold_phi(raw.at(q, t), previous.at(q, t), tau);
    }
  }
  return out;
}

double stage_node_best_response(double penalty_mass, double linear_coeff, double beta2,
                                double xi_prev, double cap, double tau) {
  const double upper = std::max(xi_prev, cap - tau);
  const double z = node_best_response(penalty_mass, linear_coeff, beta2, xi_prev, upper);
  return z > xi_prev ? z + tau : xi_prev;
}

AdversaryStrategy stage_adversary_best_response(const BipartiteNetwork& network,
                                                const TransportPlan& plan,
                                                const AdversaryCostParams& params,
                                                const AdversaryBounds& bounds,
                                                const AdversaryStrategy& previous, double tau,
                                                ExecutionMode exec) {
  validate_bounds(bounds, network.num_targets());
  validate_strategy(previous, bounds);
  if (!(tau >= 0.0)) throw Error(ErrorCode::InvalidParameter, "tau must be >= 0");
  const TargetTerms terms = target_terms(network, plan, params, exec);
  AdversaryStrategy out = previous;
  for (std::size_t q = 0; q < network.num_targets(); ++q) {
    for (OffenderType t : kOffenderTypes) {
      out.at(q, t) =
          stage_node_best_response(terms.penalty_mass[q], type_value(t) * terms.flow[q],
                                   params.beta2, previous.at(q, t), bounds.cap(q, t), tau);
    }
  }
  return out;
}

BeliefState belief_update(const BeliefState& belief, const AdversaryStrategy& action) {
  if (action.num_targets() != belief.num_targets()) {
    throw Error(ErrorCode::DimensionMismatch, "action and belief differ in size");
  }
  std::vector<std::array<double, 2>> next(belief.num_targets());
  for (std::size_t q = 0; q < next.size(); ++q) {
    const double minor = belief.prob(q, OffenderType::Minor) * action.at(q, OffenderType::Minor);
    const double major = belief.prob(q, OffenderType::Major) * action.at(q, OffenderType::Major);
    const double total = minor + major;
    if (!(total > 0.0) || !std::isfinite(total)) {
      throw Error(ErrorCode::DegenerateDenominator,
                  "belief update normalizer at target " + std::to_string(q) + " is not positive");
    }
    next[q] = {minor / total, major / total};
  }
  return BeliefState(std::move(next));
}

DynamicRun run_dynamic_game(const GameSpec& game, const DynamicOptions& options,
                            std::optional<AdversaryStrategy> initial) {
  validate_game(game);
  if (options.stages < 1) throw Error(ErrorCode::InvalidParameter, "stages must be >= 1");
  if (!(options.tau >= 0.0)) throw Error(ErrorCode::InvalidParameter, "tau must be >= 0");

  const auto& net = game.network;
  const std::size_t n_targets = net.num_targets();
  AdversaryStrategy previous = initial ? *initial : AdversaryStrategy::at_floor(n_targets);
  validate_strategy(previous, game.bounds);

  DynamicRun run{{}, game.belief, true, std::nullopt};
  const std::vector<OffenderType> all_minor(n_targets, OffenderType::Minor);
  const std::vector<OffenderType> all_major(n_targets, OffenderType::Major);

  for (int t = 1; t <= options.stages; ++t) {
    GameSpec stage_game = game;
    stage_game.belief = run.final_belief;

    detail::AlternationHooks hooks;
    hooks.weights_for = [&](const AdversaryStrategy& raw) {
      return effective_weights(net, game.weights, apply_threshold(raw, previous, options.tau),
                               stage_game.belief);
    };
    hooks.respond = [&](const TransportPlan& plan) {
      return stage_adversary_best_response(net, plan, game.cost, game.bounds, previous,
                                           options.tau, game.settings.exec);
    };
    hooks.record = [&](int round, const TransportPlan& plan, const AdversaryStrategy& raw) {
      const AdversaryStrategy eff = apply_threshold(raw, previous, options.tau);
      RoundRecord rec;
      rec.round = round;
      rec.rates = plan.rates;
      rec.xi_minor = raw.minor;
      rec.xi_major = raw.major;
      rec.dispatcher_utility = dispatcher_expected_utility(net, plan, game.weights, eff,
                                                           stage_game.belief, game.settings.lambda);
      rec.adversary_cost_minor = adversary_cost(net, plan, game.weights, eff, all_minor, game.cost);
      rec.adversary_cost_major = adversary_cost(net, plan, game.weights, eff, all_major, game.cost);
      return rec;
    };

    StageState stage{t, stage_game.belief, previous, {}, {}};
    stage.profile = detail::alternate(stage_game, AdversaryStrategy::at_caps(game.bounds),
                                      options.equilibrium, hooks);
    stage.profile.converged = stage.profile.rounds_converged;
    if (!stage.profile.converged) {
      if (options.abort_on_stage_failure) {
        throw Error(ErrorCode::StageNotConverged,
                    "stage " + std::to_string(t) + " did not reach a stage equilibrium");
      }
      run.converged = false;
      if (!run.first_failed_stage) run.first_failed_stage = t;
    }
    stage.effective = apply_threshold(stage.profile.strategy, previous, options.tau);
    stage.dispatcher_utility =
        dispatcher_expected_utility(net, stage.profile.plan, game.weights, stage.effective,
                                    stage.belief, game.settings.lambda);
    stage.adversary_cost_minor =
        adversary_cost(net, stage.profile.plan, game.weights, stage.effective, all_minor, game.cost);
    stage.adversary_cost_major =
        adversary_cost(net, stage.profile.plan, game.weights, stage.effective, all_major, game.cost);

    run.final_belief = belief_update(stage.belief, stage.profile.strategy);
    previous = stage.profile.strategy;
    run.stages.push_back(std::move(stage));
  }
  return run;
}

}  // namespace advot
