#include "advot/kernels.hpp"

#include <cmath>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace advot::kernels {

namespace serial {

void primal_update(std::span<const double> weights, std::span<const double> prices,
                   NetworkView net, double lambda, std::span<double> out) {
  const std::size_t n = weights.size();
  for (std::size_t e = 0; e < n; ++e) {
    out[e] = primal_rate(weights[e], prices[net.edge_sources[e]], lambda);
  }
}

void row_sums(std::span<const double> x, NetworkView net, std::span<double> out) {
  const std::size_t rows = net.row_offsets.size() - 1;
  for (std::size_t j = 0; j < rows; ++j) {
    out[j] = row_total(x, net.row_offsets[j], net.row_offsets[j + 1]);
  }
}

void dual_update(std::span<double> prices, std::span<const double> sums,
                 std::span<const double> capacities, double gamma) {
  for (std::size_t j = 0; j < prices.size(); ++j) {
    prices[j] = projected_price(prices[j], sums[j], capacities[j], gamma);
  }
}

void target_aggregates(std::span<const double> x, std::span<const double> punishment,
                       double beta1, std::span<const std::size_t> incoming_offsets,
                       std::span<const std::size_t> incoming_edges, std::span<double> penalty_mass,
                       std::span<double> flow) {
  const std::size_t targets = incoming_offsets.size() - 1;
  for (std::size_t q = 0; q < targets; ++q) {
    double a = 0.0;
    double f = 0.0;
    for (std::size_t k = incoming_offsets[q]; k < incoming_offsets[q + 1]; ++k) {
      const std::size_t e = incoming_edges[k];
      a += penalty_term(punishment[e], x[e], beta1);
      f += x[e];
    }
    penalty_mass[q] = a;
    flow[q] = f;
  }
}

}  // namespace serial

namespace parallel {

void primal_update(std::span<const double> weights, std::span<const double> prices,
                   NetworkView net, double lambda, std::span<double> out) {
  const auto n = static_cast<std::ptrdiff_t>(weights.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t e = 0; e < n; ++e) {
    out[e] = primal_rate(weights[e], prices[net.edge_sources[e]], lambda);
  }
}

void row_sums(std::span<const double> x, NetworkView net, std::span<double> out) {
  const auto rows = static_cast<std::ptrdiff_t>(net.row_offsets.size() - 1);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < rows; ++j) {
    out[j] = row_total(x, net.row_offsets[j], net.row_offsets[j + 1]);
  }
}

void dual_update(std::span<double> prices, std::span<const double> sums,
                 std::span<const double> capacities, double gamma) {
  const auto n = static_cast<std::ptrdiff_t>(prices.size());
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t j = 0; j < n; ++j) {
    prices[j] = projected_price(prices[j], sums[j], capacities[j], gamma);
  }
}

void target_aggregates(std::span<const double> x, std::span<const double> punishment,
                       double beta1, std::span<const std::size_t> incoming_offsets,
                       std::span<const std::size_t> incoming_edges, std::span<double> penalty_mass,
                       std::span<double> flow) {
  const auto targets = static_cast<std::ptrdiff_t>(incoming_offsets.size() - 1);
#pragma omp parallel for schedule(static)
  for (std::ptrdiff_t q = 0; q < targets; ++q) {
    double a = 0.0;
    double f = 0.0;
    for (std::size_t k = incoming_offsets[q]; k < incoming_offsets[q + 1]; ++k) {
      const std::size_t e = incoming_edges[k];
      a += penalty_term(punishment[e], x[e], beta1);
      f += x[e];
    }
    penalty_mass[q] = a;
    flow[q] = f;
  }
}

int max_threads() {
#ifdef _OPENMP
  return omp_get_max_threads();
#else
  return 1;
#endif
}

}  // namespace parallel

void primal_update(ExecutionMode mode, std::span<const double> weights,
                   std::span<const double> prices, NetworkView net, double lambda,
                   std::span<double> out) {
  if (mode == ExecutionMode::Parallel) {
    parallel::primal_update(weights, prices, net, lambda, out);
  } else {
    serial::primal_update(weights, prices, net, lambda, out);
  }
}

void row_sums(ExecutionMode mode, std::span<const double> x, NetworkView net,
              std::span<double> out) {
  if (mode == ExecutionMode::Parallel) {
    parallel::row_sums(x, net, out);
  } else {
    serial::row_sums(x, net, out);
  }
}

void dual_update(ExecutionMode mode, std::span<double> prices, std::span<const double> sums,
                 std::span<const double> capacities, double gamma) {
  if (mode == ExecutionMode::Parallel) {
    parallel::dual_update(prices, sums, capacities, gamma);
  } else {
    serial::dual_update(prices, sums, capacities, gamma);
  }
}

void target_aggregates(ExecutionMode mode, std::span<const double> x,
                       std::span<const double> punishment, double beta1,
                       std::span<const std::size_t> incoming_offsets,
                       std::span<const std::size_t> incoming_edges, std::span<double> penalty_mass,
                       std::span<double> flow) {
  if (mode == ExecutionMode::Parallel) {
    parallel::target_aggregates(x, punishment, beta1, incoming_offsets, incoming_edges,
                                penalty_mass, flow);
  } else {
    serial::target_aggregates(x, punishment, beta1, incoming_offsets, incoming_edges,
                              penalty_mass, flow);
  }
}

}  // namespace advot::kernels
