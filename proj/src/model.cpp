#include "pathorder/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <json.hpp>

#include "pathorder/errors.hpp"
#include "pathorder/numerics.hpp"
#include "text.hpp"

namespace pathorder {

MultiOrderParams::MultiOrderParams(std::size_t max_order, std::size_t node_count)
    : codec_(node_count), layers_(max_order + 1) {
  codec_.require_length(max_order);
}

void MultiOrderParams::set(std::span<const NodeIndex> history, std::vector<double> probabilities) {
  if (history.size() > max_order()) throw UsageError("history longer than the maximum order");
  layers_[history.size()][codec_.encode(history)] = std::move(probabilities);
}

const std::vector<double>* MultiOrderParams::find(std::size_t k, HistoryKey key) const {
  const auto& layer = layers_.at(k);
  const auto it = layer.find(key);
  return it == layer.end() ? nullptr : &it->second;
}

const std::vector<double>* MultiOrderParams::find(std::span<const NodeIndex> history) const {
  if (history.size() > max_order()) return nullptr;
  return find(history.size(), codec_.encode(history));
}

double MultiOrderParams::probability(const NetworkConstraint& g, std::span<const NodeIndex> history,
                                     NodeIndex next) const {
  const auto succ = successors_of(g, history);
  const auto it = std::lower_bound(succ.begin(), succ.end(), next);
  if (it == succ.end() || *it != next) return 0.0;
  const auto* row = find(history);
  if (!row) return 1.0 / static_cast<double>(succ.size());
  return (*row)[static_cast<std::size_t>(it - succ.begin())];
}

DirichletPosterior::DirichletPosterior(std::size_t max_order, std::size_t node_count, double alpha0)
    : codec_(node_count), alpha0_(alpha0), layers_(max_order + 1) {
  if (!(alpha0 > 0.0) || !std::isfinite(alpha0)) throw DomainError("alpha0 must be positive");
  codec_.require_length(max_order);
}

const std::vector<double>* DirichletPosterior::find(std::span<const NodeIndex> history) const {
  if (history.size() > max_order()) return nullptr;
  const auto& layer = layers_[history.size()];
  const auto it = layer.find(codec_.encode(history));
  return it == layer.end() ? nullptr : &it->second;
}

std::vector<double> DirichletPosterior::alpha(std::span<const NodeIndex> history, std::size_t successor_count) const {
  if (const auto* row = find(history)) return *row;
  return std::vector<double>(successor_count, alpha0_);
}

void DirichletPosterior::set(std::span<const NodeIndex> history, std::vector<double> alpha) {
  if (history.size() > max_order()) throw UsageError("history longer than the maximum order");
  for (double a : alpha) {
    if (!(a > 0.0)) throw DomainError("Dirichlet hyperparameters must be positive");
  }
  layers_[history.size()][codec_.encode(history)] = std::move(alpha);
}

MultiOrderParams mle_fit(const LayerCounts& lc, const NetworkConstraint& g) {
  MultiOrderParams params(lc.max_order, g.node_count());
  for (const auto& layer : lc.layers) {
    for (const auto& row : layer) {
      std::vector<double> p(row.successor_count, 0.0);
      const double total = static_cast<double>(row.total);
      for (const auto& [slot, c] : row.entries) p[slot] = static_cast<double>(c) / total;
      params.set(row.history, std::move(p));
    }
  }
  return params;
}

double log_likelihood(const MultiOrderParams& params, const LayerCounts& lc) {
  if (params.max_order() != lc.max_order) {
    throw UsageError("log_likelihood: parameters have order " + std::to_string(params.max_order()) +
                     " but counts have order " + std::to_string(lc.max_order));
  }
  double ll = 0.0;
  for (const auto& layer : lc.layers) {
    for (const auto& row : layer) {
      const auto* p = params.find(row.history);
      for (const auto& [slot, c] : row.entries) {
        const double prob = p ? (*p)[slot] : 1.0 / static_cast<double>(row.successor_count);
        if (prob <= 0.0) return -std::numeric_limits<double>::infinity();
        ll += static_cast<double>(c) * std::log(prob);
      }
    }
  }
  return ll;
}

namespace {

void require_same_order(const DirichletPosterior& prior, const LayerCounts& lc) {
  if (prior.max_order() != lc.max_order) {
    throw UsageError("prior has order " + std::to_string(prior.max_order()) + " but counts have order " +
                     std::to_string(lc.max_order));
  }
}

}  // namespace

DirichletPosterior posterior_update(const DirichletPosterior& prior, const LayerCounts& lc) {
  require_same_order(prior, lc);
  DirichletPosterior post = prior;
  for (const auto& layer : lc.layers) {
    for (const auto& row : layer) {
      auto alpha = post.alpha(row.history, row.successor_count);
      for (const auto& [slot, c] : row.entries) alpha[slot] += static_cast<double>(c);
      post.set(row.history, std::move(alpha));
    }
  }
  return post;
}

double log_marginal_likelihood(const DirichletPosterior& prior, const LayerCounts& lc) {
  require_same_order(prior, lc);
  using numerics::log_gamma;
  double total = 0.0;
  for (const auto& layer : lc.layers) {
    for (const auto& row : layer) {
      if (row.total == 0) continue;
      // ln B(a + c) - ln B(a); entries with c = 0 cancel.
      double alpha_sum = 0.0;
      double term = 0.0;
      if (const auto* explicit_alpha = prior.find(row.history)) {
        for (double a : *explicit_alpha) alpha_sum += a;
        for (const auto& [slot, c] : row.entries) {
          const double a = (*explicit_alpha)[slot];
          term += log_gamma(a + static_cast<double>(c)) - log_gamma(a);
        }
      } else {
        const double a = prior.alpha0();
        alpha_sum = a * static_cast<double>(row.successor_count);
        const double lg_a = log_gamma(a);
        for (const auto& [slot, c] : row.entries) term += log_gamma(a + static_cast<double>(c)) - lg_a;
      }
      term -= log_gamma(alpha_sum + static_cast<double>(row.total)) - log_gamma(alpha_sum);
      total += term;
    }
  }
  return total;
}

double sequence_log_probability(const MultiOrderParams& params, const NetworkConstraint& g,
                                std::span<const NodeIndex> nodes) {
  if (!is_feasible(g, nodes)) throw DomainError("sequence is not a feasible path in the constraint");
  const std::size_t K = params.max_order();
  double lp = 0.0;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const std::size_t start = i < K ? 0 : i - K;
    const double p = params.probability(g, nodes.subspan(start, i - start), nodes[i]);
    if (p <= 0.0) return -std::numeric_limits<double>::infinity();
    lp += std::log(p);
  }
  return lp;
}

MultiOrderParams sample_params(const DirichletPosterior& posterior, const NetworkConstraint& g, Rng& rng) {
  MultiOrderParams params(posterior.max_order(), g.node_count());
  for (std::size_t k = 0; k <= posterior.max_order(); ++k) {
    for_each_history(g, k, [&](std::span<const NodeIndex> h) {
      const auto succ = successors_of(g, h);
      if (succ.empty()) return;
      const auto alpha = posterior.alpha(h, succ.size());
      params.set(h, dirichlet_variate(alpha, rng));
    });
  }
  return params;
}

namespace {

std::string join_labels(const NetworkConstraint& g, std::span<const NodeIndex> h) {
  std::string out;
  for (std::size_t i = 0; i < h.size(); ++i) {
    if (i) out += ',';
    out += g.label(h[i]);
  }
  return out;
}

template <typename Layer>
nlohmann::ordered_json layers_to_json(const std::vector<const Layer*>& layers, const HistoryCodec& codec,
                                      const NetworkConstraint& g) {
  auto out = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < layers.size(); ++k) {
    std::vector<HistoryKey> keys;
    keys.reserve(layers[k]->size());
    for (const auto& [key, _] : *layers[k]) keys.push_back(key);
    std::sort(keys.begin(), keys.end());
    auto layer = nlohmann::ordered_json::object();
    for (HistoryKey key : keys) layer[join_labels(g, codec.decode(key, k))] = layers[k]->at(key);
    out.push_back(std::move(layer));
  }
  return out;
}

}  // namespace

std::string params_to_json(const MultiOrderParams& params, const NetworkConstraint& g) {
  std::vector<const MultiOrderParams::Layer*> layers;
  for (std::size_t k = 0; k <= params.max_order(); ++k) layers.push_back(&params.layer(k));
  nlohmann::ordered_json doc;
  doc["max_order"] = params.max_order();
  doc["default"] = "uniform";
  doc["layers"] = layers_to_json(layers, params.codec(), g);
  return doc.dump(1);
}

std::string posterior_to_json(const DirichletPosterior& posterior, const NetworkConstraint& g) {
  std::vector<const DirichletPosterior::Layer*> layers;
  for (std::size_t k = 0; k <= posterior.max_order(); ++k) layers.push_back(&posterior.layer(k));
  nlohmann::ordered_json doc;
  doc["max_order"] = posterior.max_order();
  doc["alpha0"] = posterior.alpha0();
  doc["layers"] = layers_to_json(layers, posterior.codec(), g);
  return doc.dump(1);
}

MultiOrderParams params_from_json(const std::string& text, const NetworkConstraint& g) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
  try {
    const auto K = doc.at("max_order").get<std::size_t>();
    const auto& layers = doc.at("layers");
    if (layers.size() != K + 1) throw ParseError("model JSON: expected " + std::to_string(K + 1) + " layers");
    MultiOrderParams params(K, g.node_count());
    for (std::size_t k = 0; k <= K; ++k) {
      for (const auto& [key, value] : layers[k].items()) {
        History h;
        if (!key.empty()) {
          for (auto label : text::split(key, ',')) h.push_back(g.index_of(label));
        }
        if (h.size() != k) throw ParseError("model JSON: history '" + key + "' in layer " + std::to_string(k));
        auto probs = value.get<std::vector<double>>();
        if (probs.size() != successors_of(g, h).size()) {
          throw ParseError("model JSON: vector length mismatch for history '" + key + "'");
        }
        params.set(h, std::move(probs));
      }
    }
    return params;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("model JSON: ") + e.what());
  }
}

}  // namespace pathorder
