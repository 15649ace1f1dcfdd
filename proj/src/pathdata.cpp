#include "pathorder/pathdata.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "pathorder/errors.hpp"
#include "text.hpp"

namespace pathorder {

void PathDataset::add(Path path) {
  if (path.nodes.empty()) throw UsageError("path without nodes");
  if (path.frequency == 0) throw UsageError("path frequency must be positive");
  n_total_ = checked_add(n_total_, checked_mul(path.nodes.size(), path.frequency));
  l_max_ = std::max(l_max_, path.nodes.size());
  paths_.push_back(std::move(path));
}

namespace {

std::string describe_pair(const NetworkConstraint& g, NodeIndex a, NodeIndex b) {
  return "(" + g.label(a) + "," + g.label(b) + ")";
}

}  // namespace

PathDataset ingest(std::istream& in, const NetworkConstraint& g, bool freq_column) {
  PathDataset data;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::skippable(line)) continue;
    auto fields = text::split(line, ',');
    Path path;
    if (freq_column) {
      if (fields.size() < 2) throw ParseError("expected labels followed by a frequency", line_no);
      const auto f = fields.back();
      long long value = 0;
      const auto [ptr, ec] = std::from_chars(f.data(), f.data() + f.size(), value);
      if (ec != std::errc{} || ptr != f.data() + f.size()) {
        throw ParseError("invalid frequency '" + std::string(f) + "'", line_no);
      }
      if (value <= 0) throw ParseError("frequency must be positive", line_no);
      path.frequency = static_cast<std::uint64_t>(value);
      fields.pop_back();
    }
    path.nodes.reserve(fields.size());
    for (auto label : fields) {
      if (label.empty()) throw ParseError("empty node label", line_no);
      const auto v = g.find(label);
      if (!v) throw DomainError("line " + std::to_string(line_no) + ": unknown node '" + std::string(label) + "'");
      if (!path.nodes.empty() && !g.has_edge(path.nodes.back(), *v)) {
        throw ConstraintViolation("line " + std::to_string(line_no) + ": transition " +
                                  describe_pair(g, path.nodes.back(), *v) + " is not an edge of the constraint");
      }
      path.nodes.push_back(*v);
    }
    data.add(std::move(path));
  }
  return data;
}

PathDataset read_paths(const std::string& path, const NetworkConstraint& g, bool freq_column) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open path file '" + path + "'");
  return ingest(in, g, freq_column);
}

void write_paths(std::ostream& out, const PathDataset& data, const NetworkConstraint& g, bool freq_column) {
  for (const auto& p : data.paths()) {
    for (std::size_t i = 0; i < p.nodes.size(); ++i) {
      if (i) out << ',';
      out << g.label(p.nodes[i]);
    }
    if (freq_column) {
      out << ',' << p.frequency;
    } else {
      for (std::uint64_t r = 1; r < p.frequency; ++r) {
        out << '\n';
        for (std::size_t i = 0; i < p.nodes.size(); ++i) {
          if (i) out << ',';
          out << g.label(p.nodes[i]);
        }
      }
    }
    out << '\n';
  }
}

void validate(const PathDataset& data, const NetworkConstraint& g) {
  for (const auto& p : data.paths()) {
    for (std::size_t i = 0; i < p.nodes.size(); ++i) {
      if (p.nodes[i] >= g.node_count()) throw DomainError("path contains an unknown node");
      if (i > 0 && !g.has_edge(p.nodes[i - 1], p.nodes[i])) {
        throw ConstraintViolation("transition " + describe_pair(g, p.nodes[i - 1], p.nodes[i]) +
                                  " is not an edge of the constraint");
      }
    }
  }
}

void SparseRow::add(NodeIndex v, std::uint64_t count) {
  total_ = checked_add(total_, count);
  for (auto& [node, c] : entries_) {
    if (node == v) {
      c += count;
      return;
    }
  }
  entries_.emplace_back(v, count);
}

std::uint64_t SparseRow::get(NodeIndex v) const noexcept {
  for (const auto& [node, c] : entries_) {
    if (node == v) return c;
  }
  return 0;
}

TransitionCounts::TransitionCounts(std::size_t max_order, std::size_t node_count)
    : codec_(node_count), prefix_(max_order + 1), window_(max_order + 1) {
  codec_.require_length(max_order);
}

std::uint64_t TransitionCounts::prefix_count(std::span<const NodeIndex> history, NodeIndex v) const {
  if (history.size() > max_order()) return 0;
  const auto& map = prefix_[history.size()];
  const auto it = map.find(codec_.encode(history));
  return it == map.end() ? 0 : it->second.get(v);
}

std::uint64_t TransitionCounts::window_count(std::span<const NodeIndex> history, NodeIndex v) const {
  if (history.size() > max_order()) return 0;
  const auto& map = window_[history.size()];
  const auto it = map.find(codec_.encode(history));
  return it == map.end() ? 0 : it->second.get(v);
}

void TransitionCounts::add_path(std::span<const NodeIndex> nodes, std::uint64_t frequency) {
  const std::size_t k_max = max_order();
  n_total_ = checked_add(n_total_, checked_mul(nodes.size(), frequency));
  HistoryKey rolling = 0;  // last min(t, k_max) nodes before position t
  for (std::size_t t = 0; t < nodes.size(); ++t) {
    const NodeIndex v = nodes[t];
    const std::size_t depth = std::min(t, k_max);
    if (t <= k_max) prefix_[t][rolling].add(v, frequency);
    for (std::size_t k = 0; k <= depth; ++k) window_[k][codec_.suffix(rolling, k)].add(v, frequency);
    rolling = codec_.push(rolling, v, std::min(t + 1, k_max));
  }
}

void TransitionCounts::merge(const TransitionCounts& other) {
  if (other.max_order() != max_order() || other.codec_.bits_per_node() != codec_.bits_per_node()) {
    throw UsageError("cannot merge transition counts of different shapes");
  }
  auto merge_maps = [](std::vector<CountMap>& into, const std::vector<CountMap>& from) {
    for (std::size_t k = 0; k < from.size(); ++k) {
      for (const auto& [key, row] : from[k]) {
        auto& target = into[k][key];
        for (const auto& [v, c] : row.entries()) target.add(v, c);
      }
    }
  };
  merge_maps(prefix_, other.prefix_);
  merge_maps(window_, other.window_);
  n_total_ = checked_add(n_total_, other.n_total_);
}

TransitionCounts count_transitions(const PathDataset& data, const NetworkConstraint& g, std::size_t k_max) {
  TransitionCounts tc(k_max, g.node_count());
  for (const auto& p : data.paths()) tc.add_path(p.nodes, p.frequency);
  return tc;
}

namespace {

std::vector<std::pair<HistoryKey, const SparseRow*>> sorted_rows(const CountMap& map) {
  std::vector<std::pair<HistoryKey, const SparseRow*>> rows;
  rows.reserve(map.size());
  for (const auto& [key, row] : map) rows.emplace_back(key, &row);
  std::sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  return rows;
}

}  // namespace

std::string serialize(const TransitionCounts& tc, const NetworkConstraint& g) {
  std::ostringstream out;
  out << "n_total " << tc.n_total() << '\n';
  auto dump = [&](const char* name, std::size_t k, const CountMap& map) {
    for (const auto& [key, row] : sorted_rows(map)) {
      auto entries = std::vector(row->entries().begin(), row->entries().end());
      std::sort(entries.begin(), entries.end());
      out << name << ' ' << k << " [";
      const auto h = tc.codec().decode(key, k);
      for (std::size_t i = 0; i < h.size(); ++i) out << (i ? "," : "") << g.label(h[i]);
      out << "]";
      for (const auto& [v, c] : entries) out << ' ' << g.label(v) << ':' << c;
      out << '\n';
    }
  };
  for (std::size_t k = 0; k <= tc.max_order(); ++k) dump("prefix", k, tc.prefix(k));
  for (std::size_t k = 0; k <= tc.max_order(); ++k) dump("window", k, tc.window(k));
  return out.str();
}

std::uint64_t HistoryCounts::at(std::size_t slot) const noexcept {
  for (const auto& [s, c] : entries) {
    if (s == slot) return c;
  }
  return 0;
}

std::vector<std::uint64_t> HistoryCounts::dense() const {
  std::vector<std::uint64_t> out(successor_count, 0);
  for (const auto& [s, c] : entries) out[s] = c;
  return out;
}

std::uint64_t LayerCounts::sum() const noexcept {
  std::uint64_t total = 0;
  for (const auto& layer : layers) {
    for (const auto& row : layer) total += row.total;
  }
  return total;
}

const HistoryCounts* LayerCounts::find(std::span<const NodeIndex> history) const {
  if (history.size() >= layers.size()) return nullptr;
  const auto& layer = layers[history.size()];
  const auto it = std::lower_bound(layer.begin(), layer.end(), history, [](const HistoryCounts& row, auto h) {
    return std::lexicographical_compare(row.history.begin(), row.history.end(), h.begin(), h.end());
  });
  if (it == layer.end() || !std::equal(it->history.begin(), it->history.end(), history.begin(), history.end())) {
    return nullptr;
  }
  return &*it;
}

LayerCounts layer_counts(const TransitionCounts& tc, const NetworkConstraint& g, std::size_t K) {
  if (K > tc.max_order()) {
    throw UsageError("maximum order " + std::to_string(K) + " exceeds counted order " +
                     std::to_string(tc.max_order()));
  }
  LayerCounts lc;
  lc.max_order = K;
  lc.n_total = tc.n_total();
  lc.layers.resize(K + 1);
  for (std::size_t k = 0; k <= K; ++k) {
    const CountMap& source = k < K ? tc.prefix(k) : tc.window(k);
    auto& layer = lc.layers[k];
    layer.reserve(source.size());
    for (const auto& [key, row] : sorted_rows(source)) {
      if (row->total() == 0) continue;
      HistoryCounts hc;
      hc.history = tc.codec().decode(key, k);
      const auto succ = successors_of(g, hc.history);
      hc.successor_count = succ.size();
      hc.total = row->total();
      hc.entries.reserve(row->entries().size());
      for (const auto& [v, c] : row->entries()) {
        const auto it = std::lower_bound(succ.begin(), succ.end(), v);
        if (it == succ.end() || *it != v) {
          throw ConstraintViolation("counted transition is not an edge of the constraint");
        }
        hc.entries.emplace_back(static_cast<std::uint32_t>(it - succ.begin()), c);
      }
      std::sort(hc.entries.begin(), hc.entries.end());
      layer.push_back(std::move(hc));
    }
  }
  return lc;
}

}  // namespace pathorder
