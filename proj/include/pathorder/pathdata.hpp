#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pathorder/constraint.hpp"
#include "pathorder/history.hpp"

namespace pathorder {

/// A node sequence observed `frequency` times.
struct Path {
  History nodes;
  std::uint64_t frequency = 1;
};

/// Multiset of paths. A path with L nodes contributes L transitions, the first
/// one from the empty history to its start node.
class PathDataset {
 public:
  void add(Path path);

  std::span<const Path> paths() const noexcept { return paths_; }
  std::uint64_t n_total() const noexcept { return n_total_; }
  std::size_t l_max() const noexcept { return l_max_; }
  bool empty() const noexcept { return paths_.empty(); }

 private:
  std::vector<Path> paths_;
  std::uint64_t n_total_ = 0;
  std::size_t l_max_ = 0;
};

/// Reads comma-separated label lines, validating each transition against `g`.
/// With `freq_column`, the last field is a positive integer multiplicity.
PathDataset ingest(std::istream& in, const NetworkConstraint& g, bool freq_column);
PathDataset read_paths(const std::string& path, const NetworkConstraint& g, bool freq_column);
void write_paths(std::ostream& out, const PathDataset& data, const NetworkConstraint& g, bool freq_column);

/// Throws ConstraintViolation naming the first infeasible pair.
void validate(const PathDataset& data, const NetworkConstraint& g);

/// Sparse successor counts of one history, in insertion order.
class SparseRow {
 public:
  void add(NodeIndex v, std::uint64_t count);
  std::uint64_t get(NodeIndex v) const noexcept;
  std::uint64_t total() const noexcept { return total_; }
  std::span<const std::pair<NodeIndex, std::uint64_t>> entries() const noexcept { return entries_; }

 private:
  std::vector<std::pair<NodeIndex, std::uint64_t>> entries_;
  std::uint64_t total_ = 0;
};

using CountMap = std::unordered_map<HistoryKey, SparseRow>;

/// Transition counts for every history length up to `max_order`.
///
/// prefix(k) counts transitions whose full history has exactly k nodes.
/// window(k) counts transitions whose full history has at least k nodes, keyed
/// by the last k of them. Both use HistoryKey packing of the constraint's codec.
class TransitionCounts {
 public:
  TransitionCounts(std::size_t max_order, std::size_t node_count);

  std::size_t max_order() const noexcept { return prefix_.size() - 1; }
  std::uint64_t n_total() const noexcept { return n_total_; }
  const HistoryCodec& codec() const noexcept { return codec_; }

  const CountMap& prefix(std::size_t k) const { return prefix_.at(k); }
  const CountMap& window(std::size_t k) const { return window_.at(k); }

  std::uint64_t prefix_count(std::span<const NodeIndex> history, NodeIndex v) const;
  std::uint64_t window_count(std::span<const NodeIndex> history, NodeIndex v) const;

  /// Counts one path (with multiplicity).
  void add_path(std::span<const NodeIndex> nodes, std::uint64_t frequency);

  /// Pure addition of another count object over the same node set and order.
  void merge(const TransitionCounts& other);

 private:
  HistoryCodec codec_;
  std::vector<CountMap> prefix_;
  std::vector<CountMap> window_;
  std::uint64_t n_total_ = 0;
};

/// Single pass over the dataset, counting up to history length k_max.
TransitionCounts count_transitions(const PathDataset& data, const NetworkConstraint& g, std::size_t k_max);

/// Canonical text dump of all counts (sorted), used for determinism checks.
std::string serialize(const TransitionCounts& tc, const NetworkConstraint& g);

/// Counts of one history under a fixed maximum order, indexed by successor slot
/// (position in successors_of(history)).
struct HistoryCounts {
  History history;
  std::size_t successor_count = 0;
  std::vector<std::pair<std::uint32_t, std::uint64_t>> entries;  // (slot, count), count > 0, sorted by slot
  std::uint64_t total = 0;

  std::uint64_t at(std::size_t slot) const noexcept;
  std::vector<std::uint64_t> dense() const;
};

/// Counts c(h -> v) assembled for maximum order K: exact-prefix counts for
/// layers below K and suffix-window counts at layer K. Only histories with a
/// positive total are stored; other feasible histories are implicit zeros.
struct LayerCounts {
  std::size_t max_order = 0;
  std::uint64_t n_total = 0;
  std::vector<std::vector<HistoryCounts>> layers;  // layers[k] sorted in canonical order

  std::uint64_t sum() const noexcept;
  const HistoryCounts* find(std::span<const NodeIndex> history) const;
};

/// Throws UsageError when K exceeds the counted order.
LayerCounts layer_counts(const TransitionCounts& tc, const NetworkConstraint& g, std::size_t K);

}  // namespace pathorder
