#pragma once

// Data-parallel inner loops of the solvers. Each kernel exists twice: a plain
// serial loop kept as the reference, and an OpenMP version. Both evaluate the
// same expression per element in the same order (row sums accumulate along a
// row inside one thread), so their results are bit-identical.

#include <cmath>
#include <cstddef>
#include <span>

namespace advot {

enum class ExecutionMode { Serial, Parallel };

namespace kernels {

// exp((w - p) / lambda - 1): stationary point of w x - lambda x log x - p x.
inline double primal_rate(double weight, double price, double lambda) {
  return std::exp((weight - price) / lambda - 1.0);
}

// Projected dual ascent step for one capacity constraint.
inline double projected_price(double price, double row_sum, double capacity, double gamma) {
  const double next = price + gamma * (row_sum - capacity);
  return next > 0.0 ? next : 0.0;
}

// Sum of the entries of one row, accumulated left to right.
inline double row_total(std::span<const double> x, std::size_t begin, std::size_t end) {
  double s = 0.0;
  for (std::size_t e = begin; e < end; ++e) s += x[e];
  return s;
}

// k x^beta1: one edge's contribution to a target's penalty mass.
inline double penalty_term(double coeff, double rate, double beta1) {
  return coeff * std::pow(rate, beta1);
}

struct NetworkView {
  std::span<const std::size_t> edge_sources;  // per edge
  std::span<const std::size_t> row_offsets;   // num_sources + 1
};

namespace serial {

void primal_update(std::span<const double> weights, std::span<const double> prices,
                   NetworkView net, double lambda, std::span<double> out);
void row_sums(std::span<const double> x, NetworkView net, std::span<double> out);
void dual_update(std::span<double> prices, std::span<const double> sums,
                 std::span<const double> capacities, double gamma);
// Per-target penalty mass A_q = sum coeff x^beta1 and flow F_q = sum x over
// incoming edges. incoming_offsets/incoming_edges is the CSR layout of J_q.
void target_aggregates(std::span<const double> x, std::span<const double> punishment,
                       double beta1, std::span<const std::size_t> incoming_offsets,
                       std::span<const std::size_t> incoming_edges, std::span<double> penalty_mass,
                       std::span<double> flow);

}  // namespace serial

namespace parallel {

void primal_update(std::span<const double> weights, std::span<const double> prices,
                   NetworkView net, double lambda, std::span<double> out);
void row_sums(std::span<const double> x, NetworkView net, std::span<double> out);
void dual_update(std::span<double> prices, std::span<const double> sums,
                 std::span<const double> capacities, double gamma);
void target_aggregates(std::span<const double> x, std::span<const double> punishment,
                       double beta1, std::span<const std::size_t> incoming_offsets,
                       std::span<const std::size_t> incoming_edges, std::span<double> penalty_mass,
                       std::span<double> flow);

// Number of threads OpenMP will use; 1 when built without OpenMP.
int max_threads();

}  // namespace parallel

// Dispatch on mode.
void primal_update(ExecutionMode mode, std::span<const double> weights,
                   std::span<const double> prices, NetworkView net, double lambda,
                   std::span<double> out);
void row_sums(ExecutionMode mode, std::span<const double> x, NetworkView net,
              std::span<double> out);
void dual_update(ExecutionMode mode, std::span<double> prices, std::span<const double> sums,
                 std::span<const double> capacities, double gamma);
void target_aggregates(ExecutionMode mode, std::span<const double> x,
                       std::span<const double> punishment, double beta1,
                       std::span<const std::size_t> incoming_offsets,
                       std::span<const std::size_t> incoming_edges, std::span<double> penalty_mass,
                       std::span<double> flow);

}  // namespace kernels
}  // namespace advot
