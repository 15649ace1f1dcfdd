#include "pathorder/history.hpp"

#include <string>

#include "pathorder/errors.hpp"

namespace pathorder {

void HistoryCodec::require_length(std::size_t length) const {
  if (length > max_length()) {
    throw CapacityError("histories of " + std::to_string(length) + " nodes do not fit a 64-bit key (" +
                        std::to_string(bits_) + " bits per node, at most " + std::to_string(max_length()) + ")");
  }
}

HistoryKey HistoryCodec::encode(std::span<const NodeIndex> nodes) const {
  require_length(nodes.size());
  HistoryKey key = 0;
  for (NodeIndex v : nodes) key = (key << bits_) | v;
  return key;
}

History HistoryCodec::decode(HistoryKey key, std::size_t length) const {
  History out(length);
  const HistoryKey node_mask = (HistoryKey{1} << bits_) - 1;
  for (std::size_t i = length; i-- > 0;) {
    out[i] = static_cast<NodeIndex>(key & node_mask);
    key >>= bits_;
  }
  return out;
}

}  // namespace pathorder
