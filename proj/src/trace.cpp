#include "advot/trace.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "advot/error.hpp"

namespace advot {

namespace {

void add_columns(std::vector<std::string>& cols, const std::string& prefix,
                 const std::vector<std::string>& ids) {
  for (const std::string& id : ids) cols.push_back(prefix + id);
}

std::vector<std::string> edge_labels(const BipartiteNetwork& network) {
  std::vector<std::string> out;
  for (std::size_t e = 0; e < network.num_edges(); ++e) out.push_back(network.edge_label(e));
  return out;
}

void append(std::vector<double>& row, const std::vector<double>& values) {
  row.insert(row.end(), values.begin(), values.end());
}

}  // namespace

std::string format_number(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", value);
  return buf;
}

std::string render_trace(const Trace& trace, TraceFormat format) {
  std::ostringstream out;
  for (const auto& row : trace.rows) {
    if (row.size() != trace.columns.size()) {
      throw Error(ErrorCode::DimensionMismatch, "trace row width differs from its header");
    }
  }
  if (format == TraceFormat::Csv) {
    for (std::size_t c = 0; c < trace.columns.size(); ++c) {
      out << (c ? "," : "") << trace.columns[c];
    }
    out << '\n';
    for (const auto& row : trace.rows) {
      for (std::size_t c = 0; c < row.size(); ++c) out << (c ? "," : "") << format_number(row[c]);
      out << '\n';
    }
    return out.str();
  }
  for (const auto& row : trace.rows) {
    out << '{';
    for (std::size_t c = 0; c < row.size(); ++c) {
      out << (c ? "," : "") << nlohmann::json(trace.columns[c]).dump() << ':'
          << (std::isfinite(row[c]) ? format_number(row[c]) : "null");
    }
    out << "}\n";
  }
  return out.str();
}

void emit_trace(const Trace& trace, TraceFormat format, const std::string& path) {
  const std::string text = render_trace(trace, format);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
  out << text;
  out.close();
  if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

Trace solve_trace(const BipartiteNetwork& network, const SolveReport& report) {
  Trace t;
  t.columns.push_back("iteration");
  add_columns(t.columns, "p_", network.source_ids());
  t.columns.push_back("residual");
  t.columns.push_back("objective");
  for (const IterationRecord& r : report.trace) {
    std::vector<double> row{static_cast<double>(r.iteration)};
    append(row, r.prices);
    row.push_back(r.residual);
    row.push_back(r.objective);
    t.rows.push_back(std::move(row));
  }
  return t;
}

Trace equilibrium_trace(const BipartiteNetwork& network, const std::vector<RoundRecord>& rounds) {
  Trace t;
  t.columns.push_back("round");
  add_columns(t.columns, "x_", edge_labels(network));
  add_columns(t.columns, "xi1_", network.target_ids());
  add_columns(t.columns, "xi2_", network.target_ids());
  t.columns.insert(t.columns.end(),
                   {"dispatcher_utility", "adversary_cost_type1", "adversary_cost_type2"});
  for (const RoundRecord& r : rounds) {
    std::vector<double> row{static_cast<double>(r.round)};
    append(row, r.rates);
    append(row, r.xi_minor);
    append(row, r.xi_major);
    row.insert(row.end(),
               {r.dispatcher_utility, r.adversary_cost_minor, r.adversary_cost_major});
    t.rows.push_back(std::move(row));
  }
  return t;
}

Trace dynamic_trace(const BipartiteNetwork& network, const DynamicRun& run) {
  Trace t;
  t.columns.push_back("stage");
  add_columns(t.columns, "x_", edge_labels(network));
  add_columns(t.columns, "xi1_", network.target_ids());
  add_columns(t.columns, "xi2_", network.target_ids());
  add_columns(t.columns, "mu2_", network.target_ids());
  t.columns.insert(t.columns.end(),
                   {"dispatcher_utility", "adversary_cost_type1", "adversary_cost_type2"});
  for (const StageState& s : run.stages) {
    std::vector<double> row{static_cast<double>(s.stage)};
    append(row, s.profile.plan.rates);
    append(row, s.profile.strategy.minor);
    append(row, s.profile.strategy.major);
    for (std::size_t q = 0; q < network.num_targets(); ++q) {
      row.push_back(s.belief.prob(q, OffenderType::Major));
    }
    row.insert(row.end(), {s.dispatcher_utility, s.adversary_cost_minor, s.adversary_cost_major});
    t.rows.push_back(std::move(row));
  }
  return t;
}

Trace distributed_trace(const BipartiteNetwork& network, const DistributedRun& run) {
  Trace t;
  t.columns.push_back("tick");
  add_columns(t.columns, "x_", edge_labels(network));
  add_columns(t.columns, "p_", network.source_ids());
  if (run.strategy) {
    add_columns(t.columns, "xi1_", network.target_ids());
    add_columns(t.columns, "xi2_", network.target_ids());
  }
  t.columns.push_back("residual");
  for (const TickRecord& r : run.ticks) {
    std::vector<double> row{static_cast<double>(r.tick)};
    append(row, r.rates);
    append(row, r.prices);
    if (run.strategy) {
      append(row, r.xi_minor);
      append(row, r.xi_major);
    }
    row.push_back(r.residual);
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace advot
