#pragma once

// Tabular traces: a fixed column schema per run kind and one numeric row per
// iteration, round, stage or tick. Written as CSV or as JSON lines with the
// same field names; every number is printed with 12 significant digits.

#include <string>
#include <vector>

#include "advot/bayes_dynamic.hpp"
#include "advot/distributed.hpp"

namespace advot {

enum class TraceFormat { Csv, JsonLines };

struct Trace {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
};

// %.12g; non-finite values print as inf, -inf, nan (null in JSON lines).
std::string format_number(double value);

// Throws DimensionMismatch when a row's width differs from the header.
std::string render_trace(const Trace& trace, TraceFormat format);
// Throws IoError.
void emit_trace(const Trace& trace, TraceFormat format, const std::string& path);

// iteration, p_<source>..., residual, objective
Trace solve_trace(const BipartiteNetwork& network, const SolveReport& report);

// round, x_<edge>..., xi1_<target>..., xi2_<target>..., dispatcher_utility,
// adversary_cost_type1, adversary_cost_type2
Trace equilibrium_trace(const BipartiteNetwork& network, const std::vector<RoundRecord>& rounds);

// stage, x_<edge>..., xi1_<target>..., xi2_<target>..., mu2_<target>...,
// dispatcher_utility, adversary_cost_type1, adversary_cost_type2
// xi columns hold the raw stage actions, mu2 the belief used in the stage.
Trace dynamic_trace(const BipartiteNetwork& network, const DynamicRun& run);

// tick, x_<edge>..., p_<source>..., [xi1_<target>..., xi2_<target>...,] residual
Trace distributed_trace(const BipartiteNetwork& network, const DistributedRun& run);

}  // namespace advot
