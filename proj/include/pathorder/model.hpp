#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "pathorder/constraint.hpp"
#include "pathorder/history.hpp"
#include "pathorder/pathdata.hpp"
#include "pathorder/rng.hpp"

namespace pathorder {

/// Transition probabilities of a multi-order model with layers 0..max_order.
///
/// Layer k maps each history of k nodes to a probability vector aligned with
/// successors_of(history). Histories without a stored row are treated as
/// uniform over their successors.
class MultiOrderParams {
 public:
  using Layer = std::unordered_map<HistoryKey, std::vector<double>>;

  MultiOrderParams(std::size_t max_order, std::size_t node_count);

  std::size_t max_order() const noexcept { return layers_.size() - 1; }
  const HistoryCodec& codec() const noexcept { return codec_; }
  const Layer& layer(std::size_t k) const { return layers_.at(k); }

  void set(std::span<const NodeIndex> history, std::vector<double> probabilities);
  const std::vector<double>* find(std::size_t k, HistoryKey key) const;
  const std::vector<double>* find(std::span<const NodeIndex> history) const;

  /// p(next | history) evaluated in the layer of the history's length.
  double probability(const NetworkConstraint& g, std::span<const NodeIndex> history, NodeIndex next) const;

 private:
  HistoryCodec codec_;
  std::vector<Layer> layers_;
};

/// Dirichlet hyperparameters per history. Histories without a stored row carry
/// the all-alpha0 vector.
class DirichletPosterior {
 public:
  using Layer = std::unordered_map<HistoryKey, std::vector<double>>;

  /// Prior with every hyperparameter equal to `alpha0` (1 is the flat prior).
  DirichletPosterior(std::size_t max_order, std::size_t node_count, double alpha0 = 1.0);

  std::size_t max_order() const noexcept { return layers_.size() - 1; }
  double alpha0() const noexcept { return alpha0_; }
  const HistoryCodec& codec() const noexcept { return codec_; }
  const Layer& layer(std::size_t k) const { return layers_.at(k); }

  const std::vector<double>* find(std::span<const NodeIndex> history) const;
  /// Hyperparameters of `history` (explicit or the implicit alpha0 vector).
  std::vector<double> alpha(std::span<const NodeIndex> history, std::size_t successor_count) const;

  void set(std::span<const NodeIndex> history, std::vector<double> alpha);

 private:
  HistoryCodec codec_;
  double alpha0_;
  std::vector<Layer> layers_;
};

/// Ratio-of-frequencies estimate; unobserved histories stay implicit (uniform).
MultiOrderParams mle_fit(const LayerCounts& lc, const NetworkConstraint& g);

/// Sum of c ln p over all layers, without the dataset constant ln Z.
/// Zero counts contribute nothing; a positive count on a zero probability gives -inf.
double log_likelihood(const MultiOrderParams& params, const LayerCounts& lc);

/// alpha_post = alpha_prior + c, elementwise.
DirichletPosterior posterior_update(const DirichletPosterior& prior, const LayerCounts& lc);

/// Sum over histories of ln B(alpha + c) - ln B(alpha), without ln Z.
double log_marginal_likelihood(const DirichletPosterior& prior, const LayerCounts& lc);

/// ln p(path | params): full-prefix histories below the maximum order, the
/// last max_order nodes afterwards. Throws DomainError for infeasible paths.
double sequence_log_probability(const MultiOrderParams& params, const NetworkConstraint& g,
                                 std::span<const NodeIndex> nodes);

/// Draws every feasible history's vector independently from Dirichlet(alpha_h),
/// in canonical history order.
MultiOrderParams sample_params(const DirichletPosterior& posterior, const NetworkConstraint& g, Rng& rng);

/// JSON text: {"max_order", "default": "uniform", "layers": [{"<comma-joined labels>": [p...]}]}.
std::string params_to_json(const MultiOrderParams& params, const NetworkConstraint& g);
MultiOrderParams params_from_json(const std::string& text, const NetworkConstraint& g);

std::string posterior_to_json(const DirichletPosterior& posterior, const NetworkConstraint& g);

}  // namespace pathorder
