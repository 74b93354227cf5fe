#pragma once

// Adversary-free entropic-regularized transport:
//
//   max_{x >= 0}  sum_e m_e x_e - lambda x_e log x_e   s.t.  B vec(x) <= c
//
// solved by alternating the closed-form primal response to the capacity
// prices with a projected dual ascent step on the prices. lambda = 0 is the
// linear program, handled by unregularized_solve.

#include <optional>
#include <vector>

#include "advot/kernels.hpp"
#include "advot/model.hpp"

namespace advot {

struct SolverSettings {
  double lambda = 3.0;   // regularization weight
  double gamma = 0.05;   // dual step size
  double tol = 1e-8;     // on max(complementarity residual, primal change)
  int max_iter = 50000;
  ExecutionMode exec = ExecutionMode::Serial;
  bool record_trace = false;

  friend bool operator==(const SolverSettings&, const SolverSettings&) = default;
};

// Throws InvalidParameter (or ZeroLambda when lambda == 0 and !allow_zero_lambda).
void validate_settings(const SolverSettings& settings, bool allow_zero_lambda = false);

// p_j >= 0, one per source.
struct DualPrices {
  std::vector<double> values;
  friend bool operator==(const DualPrices&, const DualPrices&) = default;
};

struct IterationRecord {
  int iteration = 0;
  std::vector<double> prices;  // after this iteration's dual step
  double residual = 0.0;
  double objective = 0.0;      // planner_objective of this iteration's plan
  friend bool operator==(const IterationRecord&, const IterationRecord&) = default;
};

struct SolveReport {
  TransportPlan plan;
  DualPrices prices;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<IterationRecord> trace;
  friend bool operator==(const SolveReport&, const SolveReport&) = default;
};

// x_e = exp((m_e - p_src(e)) / lambda - 1). Throws ZeroLambda for lambda <= 0.
TransportPlan primal_update(const BipartiteNetwork& network, const PerceptionWeights& weights,
                            const DualPrices& prices, double lambda,
                            ExecutionMode exec = ExecutionMode::Serial);

// p_j <- max(0, p_j + gamma (sum_q x_jq - c_j)).
DualPrices dual_update(const DualPrices& prices, const TransportPlan& plan,
                       const BipartiteNetwork& network, double gamma);

// max_j |min(p_j, c_j - sum_q x_jq)|.
double complementarity_residual(const BipartiteNetwork& network, const TransportPlan& plan,
                                const DualPrices& prices);

// Returns with converged = false when max_iter is reached or the iterates stop
// being finite. warm_start replaces the zero initial prices.
SolveReport solve_regularized_ot(const BipartiteNetwork& network, const PerceptionWeights& weights,
                                 const SolverSettings& settings,
                                 const std::optional<DualPrices>& warm_start = std::nullopt);

// lambda = 0: every source sends its whole capacity along its largest positive
// weight (first edge in canonical order on ties); rows without a positive
// weight stay empty.
TransportPlan unregularized_solve(const BipartiteNetwork& network,
                                  const PerceptionWeights& weights);

// x log x with 0 log 0 = 0.
double xlogx(double x);

// sum_e m_e x_e - lambda x_e log x_e.
double planner_objective(const TransportPlan& plan, const PerceptionWeights& weights,
                         double lambda);

// Lagrangian dual g(p) = max_x L(x, p) = lambda sum_e x_e(p) + sum_j p_j c_j.
double dual_objective(const BipartiteNetwork& network, const PerceptionWeights& weights,
                      const DualPrices& prices, double lambda);

}  // namespace advot
