#include "advot/model.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "advot/error.hpp"

namespace advot {

namespace {

std::map<std::string, std::size_t> index_ids(const std::vector<std::string>& ids,
                                             const char* what) {
  std::map<std::string, std::size_t> index;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (!index.emplace(ids[i], i).second) {
      throw Error(ErrorCode::DuplicateNode, std::string(what) + " id '" + ids[i] + "' repeated");
    }
  }
  return index;
}

}  // namespace

std::optional<std::size_t> BipartiteNetwork::find_edge(std::size_t j, std::size_t q) const {
  const auto first = edges_.begin() + static_cast<std::ptrdiff_t>(row_begin(j));
  const auto last = edges_.begin() + static_cast<std::ptrdiff_t>(row_end(j));
  auto it = std::lower_bound(first, last, q,
                             [](const Edge& e, std::size_t target) { return e.target < target; });
  if (it == last || it->target != q) return std::nullopt;
  return static_cast<std::size_t>(it - edges_.begin());
}

std::optional<std::size_t> BipartiteNetwork::find_source(const std::string& id) const {
  auto it = std::find(source_ids_.begin(), source_ids_.end(), id);
  if (it == source_ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - source_ids_.begin());
}

std::optional<std::size_t> BipartiteNetwork::find_target(const std::string& id) const {
  auto it = std::find(target_ids_.begin(), target_ids_.end(), id);
  if (it == target_ids_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - target_ids_.begin());
}

std::string BipartiteNetwork::edge_label(std::size_t e) const {
  const Edge& edge = edges_.at(e);
  return source_ids_[edge.source] + "->" + target_ids_[edge.target];
}

BipartiteNetwork build_network(std::vector<std::string> sources, std::vector<std::string> targets,
                               std::span<const EdgeSpec> edges, std::vector<double> capacities) {
  if (sources.empty() || targets.empty() || edges.empty()) {
    throw Error(ErrorCode::EmptyInput, "network needs at least one source, target and edge");
  }
  if (capacities.size() != sources.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "capacities: expected " + std::to_string(sources.size()) + " entries, got " +
                    std::to_string(capacities.size()));
  }
  const auto source_index = index_ids(sources, "source");
  const auto target_index = index_ids(targets, "target");

  for (std::size_t j = 0; j < capacities.size(); ++j) {
    if (!(capacities[j] > 0.0) || !std::isfinite(capacities[j])) {
      throw Error(ErrorCode::NonpositiveCapacity,
                  "capacity of source '" + sources[j] + "' must be finite and > 0");
    }
  }

  std::vector<Edge> resolved;
  resolved.reserve(edges.size());
  for (const EdgeSpec& spec : edges) {
    auto s = source_index.find(spec.source);
    auto t = target_index.find(spec.target);
    if (s == source_index.end() || t == target_index.end()) {
      throw Error(ErrorCode::DanglingEdge,
                  "edge (" + spec.source + ", " + spec.target + ") references an unknown node");
    }
    resolved.push_back({s->second, t->second});
  }
  std::sort(resolved.begin(), resolved.end(), [](const Edge& a, const Edge& b) {
    return a.source != b.source ? a.source < b.source : a.target < b.target;
  });
  auto dup = std::adjacent_find(resolved.begin(), resolved.end());
  if (dup != resolved.end()) {
    throw Error(ErrorCode::DuplicateEdge,
                "edge (" + sources[dup->source] + ", " + targets[dup->target] + ") listed twice");
  }

  BipartiteNetwork net;
  net.row_offsets_.assign(sources.size() + 1, 0);
  std::vector<std::vector<std::size_t>> incoming(targets.size());
  for (std::size_t e = 0; e < resolved.size(); ++e) {
    ++net.row_offsets_[resolved[e].source + 1];
    incoming[resolved[e].target].push_back(e);
    net.edge_sources_.push_back(resolved[e].source);
  }
  for (std::size_t j = 0; j < sources.size(); ++j) {
    if (net.row_offsets_[j + 1] == 0) {
      throw Error(ErrorCode::IsolatedNode, "source '" + sources[j] + "' has no edges");
    }
    net.row_offsets_[j + 1] += net.row_offsets_[j];
  }
  net.incoming_offsets_.push_back(0);
  for (std::size_t q = 0; q < targets.size(); ++q) {
    if (incoming[q].empty()) {
      throw Error(ErrorCode::IsolatedNode, "target '" + targets[q] + "' has no edges");
    }
    net.incoming_edges_.insert(net.incoming_edges_.end(), incoming[q].begin(), incoming[q].end());
    net.incoming_offsets_.push_back(net.incoming_edges_.size());
  }

  net.source_ids_ = std::move(sources);
  net.target_ids_ = std::move(targets);
  net.edges_ = std::move(resolved);
  net.capacities_ = std::move(capacities);
  return net;
}

BipartiteNetwork fully_connected(std::vector<std::string> sources, std::vector<std::string> targets,
                                 std::vector<double> capacities) {
  std::vector<EdgeSpec> edges;
  for (const auto& s : sources) {
    for (const auto& t : targets) edges.push_back({s, t});
  }
  return build_network(std::move(sources), std::move(targets), edges, std::move(capacities));
}

IncidenceMatrix::IncidenceMatrix(const BipartiteNetwork& network)
    : rows_(network.num_sources()),
      cols_(network.num_edges()),
      entries_(rows_ * cols_, 0) {
  for (std::size_t e = 0; e < cols_; ++e) entries_[network.edge(e).source * cols_ + e] = 1;
}

std::vector<double> IncidenceMatrix::apply(std::span<const double> x) const {
  if (x.size() != cols_) {
    throw Error(ErrorCode::DimensionMismatch, "vector length does not match incidence columns");
  }
  std::vector<double> out(rows_, 0.0);
  for (std::size_t r = 0; r < rows_; ++r) {
    for (std::size_t c = 0; c < cols_; ++c) out[r] += entries_[r * cols_ + c] * x[c];
  }
  return out;
}

IncidenceMatrix incidence(const BipartiteNetwork& network) { return IncidenceMatrix(network); }

void validate_weights(const PerceptionWeights& weights, const BipartiteNetwork& network) {
  if (weights.values.size() != network.num_edges()) {
    throw Error(ErrorCode::DimensionMismatch, "weights: expected one value per edge");
  }
  for (double w : weights.values) {
    if (!std::isfinite(w)) throw Error(ErrorCode::InvalidParameter, "weights must be finite");
  }
}

std::vector<double> row_sums(const TransportPlan& plan, const BipartiteNetwork& network) {
  if (plan.rates.size() != network.num_edges()) {
    throw Error(ErrorCode::DimensionMismatch, "plan: expected one rate per edge");
  }
  std::vector<double> sums(network.num_sources(), 0.0);
  for (std::size_t j = 0; j < sums.size(); ++j) {
    for (std::size_t e = network.row_begin(j); e < network.row_end(j); ++e) sums[j] += plan.rates[e];
  }
  return sums;
}

FeasibilityReport feasibility_check(const TransportPlan& plan, const BipartiteNetwork& network,
                                    double tol) {
  FeasibilityReport report;
  const auto sums = row_sums(plan, network);
  report.feasible = std::all_of(plan.rates.begin(), plan.rates.end(),
                                [tol](double x) { return x >= -tol; });
  report.slack.resize(sums.size());
  for (std::size_t j = 0; j < sums.size(); ++j) {
    report.slack[j] = network.capacity(j) - sums[j];
    if (report.slack[j] < -tol) report.feasible = false;
  }
  return report;
}

TypeSpace::TypeSpace(std::size_t num_targets) : num_targets_(num_targets) {
  if (num_targets == 0) throw Error(ErrorCode::EmptyInput, "type space needs at least one target");
}

std::size_t TypeSpace::size() const {
  if (num_targets_ >= 8 * sizeof(std::size_t) - 1) {
    throw Error(ErrorCode::InvalidParameter, "type space too large to enumerate");
  }
  return std::size_t{1} << num_targets_;
}

std::vector<OffenderType> TypeSpace::profile(std::size_t index) const {
  std::vector<OffenderType> out(num_targets_);
  for (std::size_t q = 0; q < num_targets_; ++q) {
    out[q] = ((index >> q) & 1U) ? OffenderType::Major : OffenderType::Minor;
  }
  return out;
}

BeliefState::BeliefState(std::vector<std::array<double, 2>> per_target)
    : probs_(std::move(per_target)) {
  if (probs_.empty()) throw Error(ErrorCode::EmptyInput, "belief needs at least one target");
  for (std::size_t q = 0; q < probs_.size(); ++q) {
    const auto& p = probs_[q];
    if (!(p[0] >= 0.0 && p[1] >= 0.0) || std::abs(p[0] + p[1] - 1.0) > kNormalizationTol) {
      throw Error(ErrorCode::InvalidBelief,
                  "belief at target " + std::to_string(q) + " is not a probability vector");
    }
  }
}

BeliefState BeliefState::uniform(std::size_t num_targets) {
  return BeliefState(std::vector<std::array<double, 2>>(num_targets, {0.5, 0.5}));
}

double BeliefState::joint(std::span<const OffenderType> profile) const {
  if (profile.size() != probs_.size()) {
    throw Error(ErrorCode::DimensionMismatch, "type profile length differs from belief");
  }
  double p = 1.0;
  for (std::size_t q = 0; q < profile.size(); ++q) p *= prob(q, profile[q]);
  return p;
}

void validate_bounds(const AdversaryBounds& bounds, std::size_t num_targets) {
  if (bounds.minor_cap.size() != num_targets || bounds.major_cap.size() != num_targets) {
    throw Error(ErrorCode::DimensionMismatch, "adversary bounds: expected one cap per target");
  }
  for (std::size_t q = 0; q < num_targets; ++q) {
    const double lo = bounds.minor_cap[q];
    const double hi = bounds.major_cap[q];
    if (!(lo >= kPerturbationFloor) || !(hi >= lo) || !std::isfinite(hi)) {
      throw Error(ErrorCode::InvalidBounds,
                  "adversary bounds at target " + std::to_string(q) +
                      " must satisfy floor <= minor cap <= major cap");
    }
  }
}

AdversaryStrategy AdversaryStrategy::at_caps(const AdversaryBounds& bounds) {
  return {bounds.minor_cap, bounds.major_cap};
}

AdversaryStrategy AdversaryStrategy::at_floor(std::size_t num_targets) {
  return {std::vector<double>(num_targets, kPerturbationFloor),
          std::vector<double>(num_targets, kPerturbationFloor)};
}

void validate_strategy(const AdversaryStrategy& strategy, const AdversaryBounds& bounds) {
  if (strategy.minor.size() != bounds.num_targets() ||
      strategy.major.size() != bounds.num_targets()) {
    throw Error(ErrorCode::DimensionMismatch, "strategy: expected one value per target and type");
  }
  for (std::size_t q = 0; q < bounds.num_targets(); ++q) {
    for (OffenderType t : kOffenderTypes) {
      const double xi = strategy.at(q, t);
      if (!(xi >= kPerturbationFloor)) {
        throw Error(ErrorCode::PerturbationBelowFloor,
                    "perturbation at target " + std::to_string(q) + " below floor");
      }
      if (xi > bounds.cap(q, t)) {
        throw Error(ErrorCode::InvalidBounds,
                    "perturbation at target " + std::to_string(q) + " exceeds its cap");
      }
    }
  }
}

void validate_cost_params(const AdversaryCostParams& params, const BipartiteNetwork& network) {
  if (params.punishment.size() != network.num_edges()) {
    throw Error(ErrorCode::DimensionMismatch, "punishment: expected one coefficient per edge");
  }
  for (double c : params.punishment) {
    if (!(c > 0.0) || !std::isfinite(c)) {
      throw Error(ErrorCode::InvalidParameter, "punishment coefficients must be > 0");
    }
  }
  auto in_unit = [](double b) { return b >= 0.0 && b <= 1.0; };
  if (!in_unit(params.beta1) || !in_unit(params.beta2)) {
    throw Error(ErrorCode::InvalidParameter, "beta1 and beta2 must lie in [0, 1]");
  }
}

double max_abs_diff(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw Error(ErrorCode::DimensionMismatch, "vector sizes differ");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace advot
