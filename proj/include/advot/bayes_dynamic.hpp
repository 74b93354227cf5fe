#pragma once

// Multistage game. Types are drawn once and fixed across stages. At each stage
// the dispatcher and the adversary play the static game, except that the
// adversary's raw action xi_t only takes effect through the thresholding map
//
//   phi(xi_t; xi_prev, tau) = xi_prev      if xi_t < xi_prev + tau
//                             xi_t - tau   otherwise
//
// and the dispatcher weighs types by the current belief mu^t. After the stage
// the belief at each target is reweighted by the observed per-type actions.

#include <optional>
#include <vector>

#include "advot/bayes_static.hpp"

namespace advot {

struct ThresholdParams {
  double tau = 0.5;
};

double threshold_phi(double xi_t, double xi_prev, double tau);

// Elementwise phi over both type branches.
AdversaryStrategy apply_threshold(const AdversaryStrategy& raw, const AdversaryStrategy& previous,
                                  double tau);

// Minimizes f(phi(xi)) for one (target, type): the effective value z is
// restricted to [xi_prev, max(xi_prev, cap - tau)], the static closed form is
// clipped into it, and xi = z + tau when z moved above xi_prev, else xi_prev.
double stage_node_best_response(double penalty_mass, double linear_coeff, double beta2,
                                double xi_prev, double cap, double tau);

AdversaryStrategy stage_adversary_best_response(const BipartiteNetwork& network,
                                                const TransportPlan& plan,
                                                const AdversaryCostParams& params,
                                                const AdversaryBounds& bounds,
                                                const AdversaryStrategy& previous, double tau,
                                                ExecutionMode exec = ExecutionMode::Serial);

// mu'(theta) proportional to mu(theta) xi_q(theta), per target.
// Throws DegenerateDenominator when the normalizer is not positive.
BeliefState belief_update(const BeliefState& belief, const AdversaryStrategy& action);

struct StageState {
  int stage = 0;                  // 1-based
  BeliefState belief;             // mu^t used during the stage
  AdversaryStrategy previous;     // xi^(t-1)
  EquilibriumProfile profile;     // plan and raw action xi^t
  AdversaryStrategy effective;    // phi(xi^t; xi^(t-1), tau)
  double dispatcher_utility = 0.0;
  double adversary_cost_minor = 0.0;
  double adversary_cost_major = 0.0;
};

struct DynamicOptions {
  int stages = 5;
  double tau = 0.5;
  bool abort_on_stage_failure = false;
  EquilibriumOptions equilibrium;
};

struct DynamicRun {
  std::vector<StageState> stages;
  BeliefState final_belief;
  bool converged = true;
  std::optional<int> first_failed_stage;
};

// initial defaults to the floor at every target and type. Throws
// StageNotConverged when a stage fails and abort_on_stage_failure is set.
DynamicRun run_dynamic_game(const GameSpec& game, const DynamicOptions& options,
                            std::optional<AdversaryStrategy> initial = std::nullopt);

}  // namespace advot
