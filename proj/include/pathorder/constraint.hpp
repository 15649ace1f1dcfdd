#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace pathorder {

/// Dense node identity. Indices follow the lexicographic order of node labels.
using NodeIndex = std::uint32_t;

/// Sequence of nodes preceding a transition; the empty sequence is the empty history.
using History = std::vector<NodeIndex>;

using LabelEdge = std::pair<std::string, std::string>;

/// Directed graph that constrains which transitions a path may take.
///
/// Immutable once built. Node indices are contiguous from 0 and assigned in
/// lexicographic label order, so every successor list (kept sorted by index)
/// is also sorted by label. All iteration orders derive from this.
class NetworkConstraint {
 public:
  NetworkConstraint() = default;

  /// Builds from labelled edges. Duplicates collapse; `undirected` inserts both
  /// directions. Self-loops are rejected with UsageError unless allowed.
  static NetworkConstraint build(std::span<const LabelEdge> edges, bool undirected,
                                 bool allow_self_loops = false);

  /// Builds from labels and index adjacency, relabelling into canonical order.
  /// Labels must be unique and non-empty.
  static NetworkConstraint from_adjacency(std::vector<std::string> labels,
                                          std::vector<std::vector<NodeIndex>> successors);

  std::size_t node_count() const noexcept { return labels_.size(); }
  std::size_t edge_count() const noexcept;
  bool empty() const noexcept { return labels_.empty(); }

  const std::string& label(NodeIndex v) const { return labels_.at(v); }
  std::span<const std::string> labels() const noexcept { return labels_; }
  std::optional<NodeIndex> find(std::string_view label) const;
  /// Throws DomainError for unknown labels.
  NodeIndex index_of(std::string_view label) const;

  std::span<const NodeIndex> successors(NodeIndex v) const { return successors_.at(v); }
  /// Every node, in canonical order; the successor set of the empty history.
  std::span<const NodeIndex> all_nodes() const noexcept { return all_nodes_; }
  bool has_edge(NodeIndex from, NodeIndex to) const;

  /// Directed edges in canonical (source, target) order.
  std::vector<std::pair<NodeIndex, NodeIndex>> edges() const;

  friend bool operator==(const NetworkConstraint& a, const NetworkConstraint& b) {
    return a.labels_ == b.labels_ && a.successors_ == b.successors_;
  }

 private:
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeIndex> index_;
  std::vector<std::vector<NodeIndex>> successors_;
  std::vector<NodeIndex> all_nodes_;
};

/// Reads `source,target` lines. Blank lines and lines starting with '#' are skipped.
NetworkConstraint parse_edge_list(std::istream& in, bool undirected, bool allow_self_loops = false);
NetworkConstraint read_edge_list(const std::string& path, bool undirected, bool allow_self_loops = false);
void write_edge_list(std::ostream& out, const NetworkConstraint& g);

/// Repeatedly removes nodes without successors (and the edges into them) until none remain.
NetworkConstraint prune_dead_ends(const NetworkConstraint& g);

/// Complete digraph on the given labels, optionally with self-loops.
NetworkConstraint complete_digraph(std::vector<std::string> labels, bool self_loops = true);

/// Union of `g` and extra directed edges over the same node set.
NetworkConstraint with_extra_edges(const NetworkConstraint& g,
                                   std::span<const std::pair<NodeIndex, NodeIndex>> extra);

/// S(h): all nodes for the empty history, otherwise the successors of the last node.
/// Throws DomainError if the history names an unknown node.
std::span<const NodeIndex> successors_of(const NetworkConstraint& g, std::span<const NodeIndex> history);

/// True when every node is known and every consecutive pair is an edge.
bool is_feasible(const NetworkConstraint& g, std::span<const NodeIndex> nodes);

/// Number of feasible histories with k nodes. Throws CapacityError beyond 2^63 - 1.
std::uint64_t count_histories(const NetworkConstraint& g, std::size_t k);

/// Visits every feasible history with k nodes in lexicographic order (k = 0 visits the empty history).
void for_each_history(const NetworkConstraint& g, std::size_t k,
                      const std::function<void(std::span<const NodeIndex>)>& visit);

/// Materialized form of for_each_history.
std::vector<History> enumerate_histories(const NetworkConstraint& g, std::size_t k);

struct DegreesOfFreedom {
  std::vector<std::uint64_t> per_layer;

  /// Sum of per_layer[0..K]. Throws CapacityError on overflow.
  std::uint64_t total(std::size_t K) const;
  std::uint64_t total() const { return per_layer.empty() ? 0 : total(per_layer.size() - 1); }
};

/// Per-layer degrees of freedom of the multi-order model up to order K, from walk counts.
/// Histories without successors contribute zero.
DegreesOfFreedom degrees_of_freedom(const NetworkConstraint& g, std::size_t K);

/// Checked 64-bit helpers (signed range, so results stay below 2^63).
std::uint64_t checked_add(std::uint64_t a, std::uint64_t b);
std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b);

}  // namespace pathorder
