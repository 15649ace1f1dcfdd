#include "pathorder/constraint.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <numeric>
#include <ostream>
#include <set>

#include "pathorder/errors.hpp"
#include "text.hpp"

namespace pathorder {

namespace {
constexpr std::uint64_t kLimit = static_cast<std::uint64_t>(std::numeric_limits<std::int64_t>::max());
}

std::uint64_t checked_add(std::uint64_t a, std::uint64_t b) {
  if (a > kLimit - b) throw CapacityError("64-bit overflow in exact count");
  return a + b;
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
  if (a != 0 && b > kLimit / a) throw CapacityError("64-bit overflow in exact count");
  return a * b;
}

NetworkConstraint NetworkConstraint::from_adjacency(std::vector<std::string> labels,
                                                    std::vector<std::vector<NodeIndex>> successors) {
  const std::size_t n = labels.size();
  if (successors.size() != n) throw UsageError("adjacency size does not match label count");
  if (n > std::numeric_limits<NodeIndex>::max()) throw CapacityError("too many nodes");

  std::vector<NodeIndex> order(n);
  std::iota(order.begin(), order.end(), NodeIndex{0});
  std::sort(order.begin(), order.end(), [&](NodeIndex a, NodeIndex b) { return labels[a] < labels[b]; });
  std::vector<NodeIndex> rank(n);
  for (std::size_t i = 0; i < n; ++i) rank[order[i]] = static_cast<NodeIndex>(i);

  NetworkConstraint g;
  g.labels_.reserve(n);
  g.successors_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const NodeIndex old = order[i];
    if (labels[old].empty()) throw UsageError("empty node label");
    if (i > 0 && labels[old] == g.labels_.back()) throw UsageError("duplicate node label '" + labels[old] + "'");
    g.labels_.push_back(std::move(labels[old]));
    auto& out = g.successors_[i];
    for (NodeIndex w : successors[old]) {
      if (w >= n) throw UsageError("successor index out of range");
      out.push_back(rank[w]);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
  }
  g.index_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) g.index_.emplace(g.labels_[i], static_cast<NodeIndex>(i));
  g.all_nodes_.resize(n);
  std::iota(g.all_nodes_.begin(), g.all_nodes_.end(), NodeIndex{0});
  return g;
}

NetworkConstraint NetworkConstraint::build(std::span<const LabelEdge> edges, bool undirected,
                                           bool allow_self_loops) {
  std::map<std::string, NodeIndex> ids;
  auto intern = [&](const std::string& label) {
    if (label.empty()) throw UsageError("empty node label");
    return ids.emplace(label, static_cast<NodeIndex>(ids.size())).first->second;
  };
  std::vector<std::pair<NodeIndex, NodeIndex>> pairs;
  pairs.reserve(edges.size() * (undirected ? 2 : 1));
  for (const auto& [from, to] : edges) {
    if (from == to && !allow_self_loops) throw UsageError("self-loop on '" + from + "' not allowed");
    const NodeIndex a = intern(from);
    const NodeIndex b = intern(to);
    pairs.emplace_back(a, b);
    if (undirected) pairs.emplace_back(b, a);
  }
  std::vector<std::string> labels(ids.size());
  for (const auto& [label, id] : ids) labels[id] = label;
  std::vector<std::vector<NodeIndex>> successors(ids.size());
  for (const auto& [a, b] : pairs) successors[a].push_back(b);
  return from_adjacency(std::move(labels), std::move(successors));
}

std::size_t NetworkConstraint::edge_count() const noexcept {
  std::size_t total = 0;
  for (const auto& s : successors_) total += s.size();
  return total;
}

std::optional<NodeIndex> NetworkConstraint::find(std::string_view label) const {
  const auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

NodeIndex NetworkConstraint::index_of(std::string_view label) const {
  if (auto v = find(label)) return *v;
  throw DomainError("unknown node '" + std::string(label) + "'");
}

bool NetworkConstraint::has_edge(NodeIndex from, NodeIndex to) const {
  if (from >= successors_.size()) return false;
  const auto& s = successors_[from];
  return std::binary_search(s.begin(), s.end(), to);
}

std::vector<std::pair<NodeIndex, NodeIndex>> NetworkConstraint::edges() const {
  std::vector<std::pair<NodeIndex, NodeIndex>> out;
  out.reserve(edge_count());
  for (NodeIndex v = 0; v < successors_.size(); ++v) {
    for (NodeIndex w : successors_[v]) out.emplace_back(v, w);
  }
  return out;
}

NetworkConstraint parse_edge_list(std::istream& in, bool undirected, bool allow_self_loops) {
  std::vector<LabelEdge> edges;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (text::skippable(line)) continue;
    const auto fields = text::split(line, ',');
    if (fields.size() != 2 || fields[0].empty() || fields[1].empty()) {
      throw ParseError("expected 'source,target'", line_no);
    }
    if (fields[0] == fields[1] && !allow_self_loops) {
      throw ParseError("self-loop on '" + std::string(fields[0]) + "' not allowed", line_no);
    }
    edges.emplace_back(std::string(fields[0]), std::string(fields[1]));
  }
  return NetworkConstraint::build(edges, undirected, allow_self_loops);
}

NetworkConstraint read_edge_list(const std::string& path, bool undirected, bool allow_self_loops) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open graph file '" + path + "'");
  return parse_edge_list(in, undirected, allow_self_loops);
}

void write_edge_list(std::ostream& out, const NetworkConstraint& g) {
  for (const auto& [a, b] : g.edges()) out << g.label(a) << ',' << g.label(b) << '\n';
}

NetworkConstraint prune_dead_ends(const NetworkConstraint& g) {
  const std::size_t n = g.node_count();
  std::vector<std::vector<NodeIndex>> predecessors(n);
  std::vector<std::size_t> out_degree(n);
  for (NodeIndex v = 0; v < n; ++v) {
    out_degree[v] = g.successors(v).size();
    for (NodeIndex w : g.successors(v)) predecessors[w].push_back(v);
  }
  std::vector<bool> removed(n, false);
  std::vector<NodeIndex> queue;
  for (NodeIndex v = 0; v < n; ++v) {
    if (out_degree[v] == 0) queue.push_back(v);
  }
  while (!queue.empty()) {
    const NodeIndex v = queue.back();
    queue.pop_back();
    if (removed[v]) continue;
    removed[v] = true;
    for (NodeIndex u : predecessors[v]) {
      if (removed[u]) continue;
      if (--out_degree[u] == 0) queue.push_back(u);
    }
  }
  std::vector<NodeIndex> remap(n, 0);
  std::vector<std::string> labels;
  for (NodeIndex v = 0; v < n; ++v) {
    if (removed[v]) continue;
    remap[v] = static_cast<NodeIndex>(labels.size());
    labels.push_back(g.label(v));
  }
  std::vector<std::vector<NodeIndex>> successors(labels.size());
  for (NodeIndex v = 0; v < n; ++v) {
    if (removed[v]) continue;
    for (NodeIndex w : g.successors(v)) {
      if (!removed[w]) successors[remap[v]].push_back(remap[w]);
    }
  }
  return NetworkConstraint::from_adjacency(std::move(labels), std::move(successors));
}

NetworkConstraint complete_digraph(std::vector<std::string> labels, bool self_loops) {
  const std::size_t n = labels.size();
  std::vector<std::vector<NodeIndex>> successors(n);
  for (NodeIndex v = 0; v < n; ++v) {
    for (NodeIndex w = 0; w < n; ++w) {
      if (v != w || self_loops) successors[v].push_back(w);
    }
  }
  return NetworkConstraint::from_adjacency(std::move(labels), std::move(successors));
}

NetworkConstraint with_extra_edges(const NetworkConstraint& g,
                                   std::span<const std::pair<NodeIndex, NodeIndex>> extra) {
  std::vector<std::string> labels(g.labels().begin(), g.labels().end());
  std::vector<std::vector<NodeIndex>> successors(g.node_count());
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    successors[v].assign(g.successors(v).begin(), g.successors(v).end());
  }
  for (const auto& [a, b] : extra) {
    if (a >= g.node_count() || b >= g.node_count()) throw UsageError("extra edge names an unknown node");
    successors[a].push_back(b);
  }
  return NetworkConstraint::from_adjacency(std::move(labels), std::move(successors));
}

std::span<const NodeIndex> successors_of(const NetworkConstraint& g, std::span<const NodeIndex> history) {
  if (history.empty()) return g.all_nodes();
  for (NodeIndex v : history) {
    if (v >= g.node_count()) throw DomainError("history contains an unknown node");
  }
  return g.successors(history.back());
}

bool is_feasible(const NetworkConstraint& g, std::span<const NodeIndex> nodes) {
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i] >= g.node_count()) return false;
    if (i > 0 && !g.has_edge(nodes[i - 1], nodes[i])) return false;
  }
  return true;
}

namespace {

// walks[v] = number of walks with k nodes ending at v.
std::vector<std::uint64_t> next_walk_counts(const NetworkConstraint& g, const std::vector<std::uint64_t>& walks) {
  std::vector<std::uint64_t> next(g.node_count(), 0);
  for (NodeIndex v = 0; v < g.node_count(); ++v) {
    if (walks[v] == 0) continue;
    for (NodeIndex w : g.successors(v)) next[w] = checked_add(next[w], walks[v]);
  }
  return next;
}

}  // namespace

std::uint64_t count_histories(const NetworkConstraint& g, std::size_t k) {
  if (k == 0) return 1;
  std::vector<std::uint64_t> walks(g.node_count(), 1);
  for (std::size_t step = 1; step < k; ++step) walks = next_walk_counts(g, walks);
  std::uint64_t total = 0;
  for (auto w : walks) total = checked_add(total, w);
  return total;
}

void for_each_history(const NetworkConstraint& g, std::size_t k,
                      const std::function<void(std::span<const NodeIndex>)>& visit) {
  if (k == 0) {
    visit({});
    return;
  }
  count_histories(g, k);  // capacity check
  History current;
  current.reserve(k);
  // Iterative DFS: cursor[d] is the next successor slot to try at depth d.
  std::vector<std::size_t> cursor(k, 0);
  for (NodeIndex start = 0; start < g.node_count(); ++start) {
    current.assign(1, start);
    if (k == 1) {
      visit(current);
      continue;
    }
    cursor[1] = 0;
    while (current.size() > 0) {
      const std::size_t depth = current.size();
      if (depth == k) {
        visit(current);
        current.pop_back();
        continue;
      }
      const auto succ = g.successors(current.back());
      std::size_t& c = cursor[depth];
      if (c < succ.size()) {
        current.push_back(succ[c++]);
        if (current.size() < k) cursor[current.size()] = 0;
      } else {
        current.pop_back();
      }
    }
  }
}

std::vector<History> enumerate_histories(const NetworkConstraint& g, std::size_t k) {
  std::vector<History> out;
  for_each_history(g, k, [&](std::span<const NodeIndex> h) { out.emplace_back(h.begin(), h.end()); });
  return out;
}

std::uint64_t DegreesOfFreedom::total(std::size_t K) const {
  if (K >= per_layer.size()) throw UsageError("degrees of freedom requested beyond computed order");
  std::uint64_t sum = 0;
  for (std::size_t k = 0; k <= K; ++k) sum = checked_add(sum, per_layer[k]);
  return sum;
}

DegreesOfFreedom degrees_of_freedom(const NetworkConstraint& g, std::size_t K) {
  DegreesOfFreedom df;
  df.per_layer.reserve(K + 1);
  const std::size_t n = g.node_count();
  df.per_layer.push_back(n > 0 ? n - 1 : 0);
  if (K == 0) return df;
  std::vector<std::uint64_t> excess(n);
  for (NodeIndex v = 0; v < n; ++v) {
    const auto d = g.successors(v).size();
    excess[v] = d > 0 ? d - 1 : 0;
  }
  std::vector<std::uint64_t> walks(n, 1);
  for (std::size_t k = 1; k <= K; ++k) {
    if (k > 1) walks = next_walk_counts(g, walks);
    std::uint64_t layer = 0;
    for (NodeIndex v = 0; v < n; ++v) layer = checked_add(layer, checked_mul(walks[v], excess[v]));
    df.per_layer.push_back(layer);
  }
  return df;
}

}  // namespace pathorder
