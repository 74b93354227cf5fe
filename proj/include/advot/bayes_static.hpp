#pragma once

// Static Bayesian game between the dispatcher (chooses the transport plan x,
// maximizing expected regularized utility under the belief over adversary
// types) and the typed adversary (chooses a perturbation xi_q(theta_q) per
// target node and type, minimizing its cost).
//
// The dispatcher's expected utility under belief mu is
//
//   sum_e (m_e + mu_q(1) xi_q(1) + 2 mu_q(2) xi_q(2)) x_e - lambda x_e log x_e
//
// with q the target of e, so its best response is a regularized transport
// solve on those effective weights. The adversary's cost for type theta is
//
//   sum_e k_e xi_q^(-beta2) x_e^beta1 + (m_e + theta_q xi_q) x_e
//
// which separates into one convex scalar problem per (target, type):
// f(xi) = A xi^(-beta2) + B xi with A = sum k_e x_e^beta1 and
// B = theta sum x_e over the incoming edges.

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "advot/model.hpp"
#include "advot/otsolve.hpp"

namespace advot {

struct GameSpec {
  BipartiteNetwork network;
  PerceptionWeights weights;
  AdversaryBounds bounds;
  AdversaryCostParams cost;
  BeliefState belief;
  SolverSettings settings;
};

void validate_game(const GameSpec& game);

struct EquilibriumOptions {
  double tol = 1e-7;            // on successive-round profile change
  int max_rounds = 500;
  double deviation_eps = 1e-4;  // largest tolerated deviation gain
  int grid_points = 21;
  bool record_trace = true;

  friend bool operator==(const EquilibriumOptions&, const EquilibriumOptions&) = default;
};

struct RoundRecord {
  int round = 0;
  EdgeValues rates;
  std::vector<double> xi_minor;
  std::vector<double> xi_major;
  double dispatcher_utility = 0.0;
  double adversary_cost_minor = 0.0;  // every target of type 1
  double adversary_cost_major = 0.0;  // every target of type 2
};

struct DeviationReport {
  double gap = 0.0;  // max of the two below
  double dispatcher_gap = 0.0;
  double adversary_gap = 0.0;
};

struct EquilibriumProfile {
  TransportPlan plan;
  DualPrices prices;
  AdversaryStrategy strategy;
  int rounds = 0;
  double last_change = 0.0;
  bool rounds_converged = false;  // alternation reached tol within max_rounds
  bool converged = false;         // rounds_converged and deviation gap <= eps
  DeviationReport deviation;
  std::vector<RoundRecord> trace;
};

PerceptionWeights effective_weights(const BipartiteNetwork& network,
                                    const PerceptionWeights& weights,
                                    const AdversaryStrategy& strategy, const BeliefState& belief);

double dispatcher_expected_utility(const BipartiteNetwork& network, const TransportPlan& plan,
                                   const PerceptionWeights& weights,
                                   const AdversaryStrategy& strategy, const BeliefState& belief,
                                   double lambda);

// Regularized objective with the unperturbed weights: the utility the
// dispatcher actually realizes from a plan chosen under manipulated perception.
double realized_utility(const TransportPlan& plan, const PerceptionWeights& weights,
                        double lambda);

SolveReport dispatcher_best_response(const GameSpec& game, const AdversaryStrategy& strategy,
                                     const std::optional<DualPrices>& warm_start = std::nullopt);

// Cost of the adversary of type profile `types` (one entry per target).
// Throws PerturbationBelowFloor when any used xi is below the floor.
double adversary_cost(const BipartiteNetwork& network, const TransportPlan& plan,
                      const PerceptionWeights& weights, const AdversaryStrategy& strategy,
                      std::span<const OffenderType> types, const AdversaryCostParams& params);

// Per-target sums over incoming edges: A_q = sum k_e x_e^beta1, F_q = sum x_e.
struct TargetTerms {
  std::vector<double> penalty_mass;
  std::vector<double> flow;
};

TargetTerms target_terms(const BipartiteNetwork& network, const TransportPlan& plan,
                         const AdversaryCostParams& params,
                         ExecutionMode exec = ExecutionMode::Serial);

// f(xi) = A xi^(-beta2) + B xi and its derivative.
double node_cost(double xi, double penalty_mass, double linear_coeff, double beta2);
double node_cost_derivative(double xi, double penalty_mass, double linear_coeff, double beta2);

// Minimizer of f over [lo, hi]: the stationary point (beta2 A / B)^(1/(1+beta2))
// clipped into the interval, or hi when B = 0.
double node_best_response(double penalty_mass, double linear_coeff, double beta2, double lo,
                          double hi);

// One type branch: xi_q(t) for every target.
std::vector<double> adversary_best_response(const BipartiteNetwork& network,
                                            const TransportPlan& plan,
                                            const AdversaryCostParams& params,
                                            const AdversaryBounds& bounds, OffenderType type,
                                            ExecutionMode exec = ExecutionMode::Serial);

AdversaryStrategy adversary_best_response(const BipartiteNetwork& network,
                                          const TransportPlan& plan,
                                          const AdversaryCostParams& params,
                                          const AdversaryBounds& bounds,
                                          ExecutionMode exec = ExecutionMode::Serial);

// Largest gain found by one-coordinate deviations on a grid: the dispatcher
// moves one rate within its row's spare capacity or shifts mass between two
// edges of a row; each adversary type moves one xi_q within its box. Every
// family is sampled on grid_points evenly spaced points over the whole range
// and again over a narrow window around the profile value.
DeviationReport deviation_check(const GameSpec& game, const TransportPlan& plan,
                                const AdversaryStrategy& strategy, int grid_points = 21);

EquilibriumProfile solve_bayesian_equilibrium(const GameSpec& game,
                                              const EquilibriumOptions& options = {});

namespace detail {

// Alternating best-response loop shared by the static and per-stage solvers.
struct AlternationHooks {
  // Dispatcher weights given the adversary's raw action.
  std::function<PerceptionWeights(const AdversaryStrategy&)> weights_for;
  // Adversary response to a plan.
  std::function<AdversaryStrategy(const TransportPlan&)> respond;
  // Trace row for (plan, raw action).
  std::function<RoundRecord(int, const TransportPlan&, const AdversaryStrategy&)> record;
};

EquilibriumProfile alternate(const GameSpec& game, AdversaryStrategy initial,
                             const EquilibriumOptions& options, const AlternationHooks& hooks);

}  // namespace detail

}  // namespace advot
