#include "pathorder/synth.hpp"

#include <algorithm>
#include <charconv>
#include <unordered_set>

#include "pathorder/errors.hpp"
#include "text.hpp"

namespace pathorder {
namespace {

// Floyd's algorithm: `count` distinct values from [0, universe).
std::vector<std::uint64_t> sample_without_replacement(std::uint64_t universe, std::uint64_t count, Rng& rng) {
  std::unordered_set<std::uint64_t> chosen;
  std::vector<std::uint64_t> out;
  out.reserve(count);
  chosen.reserve(count * 2);
  for (std::uint64_t j = universe - count; j < universe; ++j) {
    const std::uint64_t t = rng.below(j + 1);
    if (chosen.insert(t).second) {
      out.push_back(t);
    } else {
      chosen.insert(j);
      out.push_back(j);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::string padded_label(std::size_t i, std::size_t width) {
  std::string s = std::to_string(i);
  if (s.size() < width) s.insert(0, width - s.size(), '0');
  return s;
}

std::size_t parse_count(std::string_view s, std::string_view what) {
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw UsageError("invalid " + std::string(what) + " '" + std::string(s) + "'");
  }
  return value;
}

}  // namespace

NetworkConstraint random_gnm(std::size_t n, std::size_t m, std::uint64_t seed) {
  const std::uint64_t pairs = n < 2 ? 0 : static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (m > pairs) {
    throw UsageError("G(n,m): m = " + std::to_string(m) + " exceeds n(n-1)/2 = " + std::to_string(pairs));
  }
  Rng rng(seed);
  const std::size_t width = std::to_string(n > 0 ? n - 1 : 0).size();
  std::vector<std::string> labels;
  labels.reserve(n);
  for (std::size_t i = 0; i < n; ++i) labels.push_back(padded_label(i, width));
  std::vector<std::vector<NodeIndex>> successors(n);
  // Pair index p enumerates (i, j), i < j, row by row.
  std::size_t row = 0;
  std::uint64_t row_start = 0;
  for (std::uint64_t p : sample_without_replacement(pairs, m, rng)) {
    while (p >= row_start + (n - 1 - row)) {
      row_start += n - 1 - row;
      ++row;
    }
    const auto i = static_cast<NodeIndex>(row);
    const auto j = static_cast<NodeIndex>(row + 1 + (p - row_start));
    successors[i].push_back(j);
    successors[j].push_back(i);
  }
  return prune_dead_ends(NetworkConstraint::from_adjacency(std::move(labels), std::move(successors)));
}

GroundTruth sample_ground_truth(const NetworkConstraint& g, std::size_t K_gt, std::uint64_t seed) {
  if (g.empty()) throw DomainError("cannot sample a model on an empty graph");
  for (std::size_t k = 0; k <= K_gt; ++k) count_histories(g, k);
  GroundTruth gt;
  gt.graph = g;
  gt.order = K_gt;
  gt.seed = seed;
  gt.params = MultiOrderParams(K_gt, g.node_count());
  Rng rng(seed);
  for (std::size_t k = 0; k <= K_gt; ++k) {
    for_each_history(g, k, [&](std::span<const NodeIndex> h) {
      const auto succ = successors_of(g, h);
      if (succ.empty()) return;
      gt.params.set(h, flat_dirichlet_variate(succ.size(), rng));
    });
  }
  return gt;
}

PathLengthLaw PathLengthLaw::constant(std::size_t nodes) {
  if (nodes < 1) throw UsageError("path length must be at least one node");
  return {Kind::constant, nodes, nodes};
}

PathLengthLaw PathLengthLaw::uniform(std::size_t lo, std::size_t hi) {
  if (lo < 1 || hi < lo) throw UsageError("uniform path length needs 1 <= a <= b");
  return {Kind::uniform, lo, hi};
}

PathLengthLaw PathLengthLaw::parse(std::string_view spec) {
  const auto parts = text::split(spec, ':');
  if (parts.size() == 2 && parts[0] == "constant") return constant(parse_count(parts[1], "path length"));
  if (parts.size() == 3 && parts[0] == "uniform") {
    return uniform(parse_count(parts[1], "path length"), parse_count(parts[2], "path length"));
  }
  throw UsageError("invalid length law '" + std::string(spec) + "' (expected constant:L or uniform:a:b)");
}

std::string PathLengthLaw::to_string() const {
  if (kind == Kind::constant) return "constant:" + std::to_string(min_nodes);
  return "uniform:" + std::to_string(min_nodes) + ":" + std::to_string(max_nodes);
}

std::size_t PathLengthLaw::draw(Rng& rng) const {
  if (kind == Kind::constant) return min_nodes;
  return min_nodes + static_cast<std::size_t>(rng.below(max_nodes - min_nodes + 1));
}

PathDataset generate_paths(const GroundTruth& gt, std::uint64_t n_total_target, const PathLengthLaw& law,
                           std::uint64_t seed) {
  if (n_total_target < 1) throw UsageError("target data size must be positive");
  const auto& g = gt.graph;
  const auto& codec = gt.params.codec();
  const std::size_t K = gt.order;
  const auto* start = gt.params.find(0, 0);
  if (!start || g.empty()) throw DomainError("ground truth has no start-node distribution");

  Rng rng(seed);
  PathDataset data;
  while (data.n_total() < n_total_target) {
    const std::size_t length = law.draw(rng);
    Path path;
    path.nodes.reserve(length);
    HistoryKey key = 0;  // last min(t, K) nodes
    for (std::size_t t = 0; t < length; ++t) {
      const std::size_t depth = std::min(t, K);
      const auto succ = t == 0 ? g.all_nodes() : g.successors(path.nodes.back());
      if (succ.empty()) break;
      const auto* probs = gt.params.find(depth, key);
      if (!probs) throw DomainError("ground truth lacks a reachable history");
      const NodeIndex v = succ[categorical_draw(*probs, rng)];
      path.nodes.push_back(v);
      key = codec.push(key, v, std::min(t + 1, K));
    }
    data.add(std::move(path));
  }
  return data;
}

PerturbedConstraint perturb_constraint(const NetworkConstraint& g, std::size_t extra_m, std::uint64_t seed) {
  std::vector<std::pair<NodeIndex, NodeIndex>> absent;
  const std::size_t n = g.node_count();
  for (NodeIndex a = 0; a < n; ++a) {
    for (NodeIndex b = 0; b < n; ++b) {
      if (a != b && !g.has_edge(a, b)) absent.emplace_back(a, b);
    }
  }
  if (extra_m > absent.size()) {
    throw UsageError("cannot add " + std::to_string(extra_m) + " edges: only " + std::to_string(absent.size()) +
                     " directed pairs are absent");
  }
  Rng rng(seed);
  PerturbedConstraint out;
  out.base = g;
  for (std::uint64_t idx : sample_without_replacement(absent.size(), extra_m, rng)) {
    out.extra_edges.push_back(absent[idx]);
  }
  return out;
}

}  // namespace pathorder
