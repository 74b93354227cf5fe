#pragma once

// Domain types shared by every solver: the bipartite source/target network,
// per-edge value vectors (weights, plans), the adversary's type space, beliefs
// and perturbation strategies.
//
// Edges are stored in canonical row-major order (by source index, then target
// index), so each source owns one contiguous block of edge indices. Every
// per-edge vector in the library uses this layout.

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace advot {

// Lower bound on every adversary perturbation. Keeps xi^(-beta2) and the
// belief-update denominator finite.
inline constexpr double kPerturbationFloor = 1e-6;

using EdgeValues = std::vector<double>;

struct Edge {
  std::size_t source;
  std::size_t target;
  friend bool operator==(const Edge&, const Edge&) = default;
};

// Edge given by node identifiers, as it appears in scenario files.
struct EdgeSpec {
  std::string source;
  std::string target;
};

class BipartiteNetwork {
 public:
  std::size_t num_sources() const { return source_ids_.size(); }
  std::size_t num_targets() const { return target_ids_.size(); }
  std::size_t num_edges() const { return edges_.size(); }

  const std::vector<std::string>& source_ids() const { return source_ids_; }
  const std::vector<std::string>& target_ids() const { return target_ids_; }
  const std::string& source_id(std::size_t j) const { return source_ids_.at(j); }
  const std::string& target_id(std::size_t q) const { return target_ids_.at(q); }

  std::span<const Edge> edges() const { return edges_; }
  const Edge& edge(std::size_t e) const { return edges_.at(e); }
  std::span<const double> capacities() const { return capacities_; }
  double capacity(std::size_t j) const { return capacities_.at(j); }

  // Edges leaving source j occupy [row_begin(j), row_end(j)).
  std::size_t row_begin(std::size_t j) const { return row_offsets_.at(j); }
  std::size_t row_end(std::size_t j) const { return row_offsets_.at(j + 1); }
  std::span<const std::size_t> row_offsets() const { return row_offsets_; }

  // Edge indices entering target q, ascending.
  std::span<const std::size_t> edges_into(std::size_t q) const {
    return std::span<const std::size_t>(incoming_edges_)
        .subspan(incoming_offsets_.at(q), incoming_offsets_.at(q + 1) - incoming_offsets_.at(q));
  }
  // CSR layout of the incoming edge lists.
  std::span<const std::size_t> incoming_offsets() const { return incoming_offsets_; }
  std::span<const std::size_t> incoming_edges() const { return incoming_edges_; }

  // Source index of every edge; the layout kernels iterate over.
  std::span<const std::size_t> edge_sources() const { return edge_sources_; }

  std::optional<std::size_t> find_edge(std::size_t j, std::size_t q) const;
  std::optional<std::size_t> find_source(const std::string& id) const;
  std::optional<std::size_t> find_target(const std::string& id) const;

  // "source->target" label used in trace headers.
  std::string edge_label(std::size_t e) const;

  friend bool operator==(const BipartiteNetwork&, const BipartiteNetwork&) = default;

 private:
  friend BipartiteNetwork build_network(std::vector<std::string> sources,
                                        std::vector<std::string> targets,
                                        std::span<const EdgeSpec> edges,
                                        std::vector<double> capacities);

  std::vector<std::string> source_ids_;
  std::vector<std::string> target_ids_;
  std::vector<Edge> edges_;
  std::vector<double> capacities_;
  std::vector<std::size_t> row_offsets_;
  std::vector<std::size_t> incoming_offsets_;
  std::vector<std::size_t> incoming_edges_;
  std::vector<std::size_t> edge_sources_;
};

// Validates and canonicalizes a network. Throws Error with EmptyInput,
// DuplicateNode, DimensionMismatch, DuplicateEdge, DanglingEdge,
// NonpositiveCapacity or IsolatedNode.
BipartiteNetwork build_network(std::vector<std::string> sources,
                               std::vector<std::string> targets,
                               std::span<const EdgeSpec> edges,
                               std::vector<double> capacities);

// Every source connected to every target.
BipartiteNetwork fully_connected(std::vector<std::string> sources,
                                 std::vector<std::string> targets,
                                 std::vector<double> capacities);

// 0-1 matrix with one row per source and one column per edge.
class IncidenceMatrix {
 public:
  explicit IncidenceMatrix(const BipartiteNetwork& network);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  int operator()(std::size_t row, std::size_t col) const { return entries_.at(row * cols_ + col); }

  // B * vec(x).
  std::vector<double> apply(std::span<const double> x) const;

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<int> entries_;
};

IncidenceMatrix incidence(const BipartiteNetwork& network);

// m_jq, one value per edge.
struct PerceptionWeights {
  EdgeValues values;
  friend bool operator==(const PerceptionWeights&, const PerceptionWeights&) = default;
};

// x_jq, one nonnegative rate per edge.
struct TransportPlan {
  EdgeValues rates;
  friend bool operator==(const TransportPlan&, const TransportPlan&) = default;
};

void validate_weights(const PerceptionWeights& weights, const BipartiteNetwork& network);

std::vector<double> row_sums(const TransportPlan& plan, const BipartiteNetwork& network);

struct FeasibilityReport {
  bool feasible = false;
  std::vector<double> slack;  // c_j - sum_q x_jq
};

FeasibilityReport feasibility_check(const TransportPlan& plan, const BipartiteNetwork& network,
                                    double tol);

enum class OffenderType : int { Minor = 1, Major = 2 };

inline constexpr std::array<OffenderType, 2> kOffenderTypes{OffenderType::Minor,
                                                            OffenderType::Major};

constexpr double type_value(OffenderType t) { return static_cast<double>(static_cast<int>(t)); }
constexpr std::size_t type_slot(OffenderType t) { return static_cast<int>(t) - 1; }

// Product of the per-target type sets {Minor, Major}.
class TypeSpace {
 public:
  explicit TypeSpace(std::size_t num_targets);

  std::size_t num_targets() const { return num_targets_; }
  std::size_t size() const;
  // Bit q of index selects Major at target q.
  std::vector<OffenderType> profile(std::size_t index) const;

 private:
  std::size_t num_targets_;
};

// Per-target distribution over {Minor, Major}; the joint belief is the product.
class BeliefState {
 public:
  static constexpr double kNormalizationTol = 1e-12;

  explicit BeliefState(std::vector<std::array<double, 2>> per_target);
  static BeliefState uniform(std::size_t num_targets);

  std::size_t num_targets() const { return probs_.size(); }
  double prob(std::size_t q, OffenderType t) const { return probs_.at(q)[type_slot(t)]; }
  std::span<const std::array<double, 2>> per_target() const { return probs_; }
  double joint(std::span<const OffenderType> profile) const;

  friend bool operator==(const BeliefState&, const BeliefState&) = default;

 private:
  std::vector<std::array<double, 2>> probs_;
};

// Caps on the perturbation per target: minor_cap for type 1, major_cap for type 2.
struct AdversaryBounds {
  std::vector<double> minor_cap;
  std::vector<double> major_cap;

  std::size_t num_targets() const { return minor_cap.size(); }
  double cap(std::size_t q, OffenderType t) const {
    return t == OffenderType::Minor ? minor_cap.at(q) : major_cap.at(q);
  }
  friend bool operator==(const AdversaryBounds&, const AdversaryBounds&) = default;
};

void validate_bounds(const AdversaryBounds& bounds, std::size_t num_targets);

// xi_q(theta_q): one scalar per target and type.
struct AdversaryStrategy {
  std::vector<double> minor;
  std::vector<double> major;

  static AdversaryStrategy at_caps(const AdversaryBounds& bounds);
  static AdversaryStrategy at_floor(std::size_t num_targets);

  std::size_t num_targets() const { return minor.size(); }
  double at(std::size_t q, OffenderType t) const {
    return t == OffenderType::Minor ? minor.at(q) : major.at(q);
  }
  double& at(std::size_t q, OffenderType t) {
    return t == OffenderType::Minor ? minor.at(q) : major.at(q);
  }
  friend bool operator==(const AdversaryStrategy&, const AdversaryStrategy&) = default;
};

// Throws PerturbationBelowFloor or InvalidBounds.
void validate_strategy(const AdversaryStrategy& strategy, const AdversaryBounds& bounds);

struct AdversaryCostParams {
  EdgeValues punishment;  // per-edge coefficient of the expected penalty
  double beta1 = 0.5;     // exponent on the transport rate
  double beta2 = 0.5;     // exponent on the perturbation
  friend bool operator==(const AdversaryCostParams&, const AdversaryCostParams&) = default;
};

void validate_cost_params(const AdversaryCostParams& params, const BipartiteNetwork& network);

// Largest absolute entrywise difference; sizes must match.
double max_abs_diff(std::span<const double> a, std::span<const double> b);

}  // namespace advot
