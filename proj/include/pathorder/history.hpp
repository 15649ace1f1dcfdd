#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <span>

#include "pathorder/constraint.hpp"

namespace pathorder {

/// A history packed into 64 bits, first node in the most significant slot.
/// Keys are only meaningful together with the history length, so callers keep
/// one key space per length. For equal lengths, numeric key order equals the
/// lexicographic order of the node sequences.
using HistoryKey = std::uint64_t;

class HistoryCodec {
 public:
  explicit HistoryCodec(std::size_t node_count = 1)
      : bits_(std::max<unsigned>(1, static_cast<unsigned>(std::bit_width(node_count > 0 ? node_count - 1 : 0)))) {}

  unsigned bits_per_node() const noexcept { return bits_; }
  std::size_t max_length() const noexcept { return 64 / bits_; }

  /// Throws CapacityError when histories of `length` nodes cannot be packed.
  void require_length(std::size_t length) const;

  HistoryKey encode(std::span<const NodeIndex> nodes) const;
  History decode(HistoryKey key, std::size_t length) const;

  /// Appends `v` and keeps the last `length` nodes.
  HistoryKey push(HistoryKey key, NodeIndex v, std::size_t length) const noexcept {
    return ((key << bits_) | v) & mask(length);
  }

  /// The last `length` nodes of a packed history.
  HistoryKey suffix(HistoryKey key, std::size_t length) const noexcept { return key & mask(length); }

  NodeIndex last(HistoryKey key) const noexcept {
    return static_cast<NodeIndex>(key & ((HistoryKey{1} << bits_) - 1));
  }

 private:
  HistoryKey mask(std::size_t length) const noexcept {
    const std::size_t width = length * bits_;
    return width >= 64 ? ~HistoryKey{0} : (HistoryKey{1} << width) - 1;
  }

  unsigned bits_;
};

}  // namespace pathorder
