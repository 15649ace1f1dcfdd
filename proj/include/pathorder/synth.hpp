#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "pathorder/constraint.hpp"
#include "pathorder/model.hpp"
#include "pathorder/pathdata.hpp"
#include "pathorder/rng.hpp"

namespace pathorder {

/// Undirected G(n, m) with m distinct node pairs drawn uniformly, symmetrized to
/// directed edges and pruned of dead ends. Labels are zero-padded indices.
NetworkConstraint random_gnm(std::size_t n, std::size_t m, std::uint64_t seed);

/// A generating multi-order model of maximum order `order` on `graph`.
struct GroundTruth {
  NetworkConstraint graph;
  std::size_t order = 0;
  MultiOrderParams params{0, 1};
  std::uint64_t seed = 0;
};

/// Draws every feasible history's vector (layers 0..K_gt) from the flat Dirichlet.
GroundTruth sample_ground_truth(const NetworkConstraint& g, std::size_t K_gt, std::uint64_t seed);

/// Distribution of generated path lengths, in nodes.
struct PathLengthLaw {
  enum class Kind { constant, uniform };
  Kind kind = Kind::constant;
  std::size_t min_nodes = 1;
  std::size_t max_nodes = 1;

  static PathLengthLaw constant(std::size_t nodes);
  static PathLengthLaw uniform(std::size_t lo, std::size_t hi);
  /// Default law for ground-truth order K: constant K + 3 nodes.
  static PathLengthLaw default_for(std::size_t K_gt) { return constant(K_gt + 3); }

  /// "constant:L" or "uniform:a:b".
  static PathLengthLaw parse(std::string_view text);
  std::string to_string() const;

  std::size_t draw(Rng& rng) const;
};

/// Samples paths from the ground truth until at least `n_total_target` transitions
/// are collected. A path stops early if it reaches a history without successors.
PathDataset generate_paths(const GroundTruth& gt, std::uint64_t n_total_target, const PathLengthLaw& law,
                           std::uint64_t seed);

/// Fitting constraint with spurious directed edges added to a base graph.
struct PerturbedConstraint {
  NetworkConstraint base;
  std::vector<std::pair<NodeIndex, NodeIndex>> extra_edges;

  /// Union graph (same node set as base).
  NetworkConstraint fitting_graph() const { return with_extra_edges(base, extra_edges); }
};

/// Adds `extra_m` directed non-loop pairs absent from g, chosen uniformly without replacement.
PerturbedConstraint perturb_constraint(const NetworkConstraint& g, std::size_t extra_m, std::uint64_t seed);

}  // namespace pathorder
