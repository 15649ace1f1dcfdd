#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "pathorder/errors.hpp"
#include "pathorder/model.hpp"
#include "pathorder/synth.hpp"

using namespace pathorder;
using fixtures::nodes;

namespace {

struct Star {
  NetworkConstraint g = fixtures::star();
  PathDataset d = fixtures::star_paths(g);
  TransitionCounts tc = count_transitions(d, g, 1);
};

}  // namespace

TEST_CASE("mle examples") {
  Star s;
  const auto lc = layer_counts(s.tc, s.g, 1);
  const auto p = mle_fit(lc, s.g);
  const auto* a = p.find(nodes(s.g, {"a"}));
  REQUIRE(a);
  CHECK((*a)[0] == doctest::Approx(2.0 / 3));
  CHECK((*a)[1] == doctest::Approx(1.0 / 3));
  const auto* eps = p.find(History{});
  REQUIRE(eps);
  CHECK(*eps == std::vector<double>{1.0, 0.0, 0.0});
  // (b) is unobserved: single successor, forced probability 1
  CHECK(p.find(nodes(s.g, {"b"})) == nullptr);
  CHECK(p.probability(s.g, nodes(s.g, {"b"}), s.g.index_of("a")) == 1.0);
}

TEST_CASE("log likelihood examples") {
  Star s;
  const auto lc1 = layer_counts(s.tc, s.g, 1);
  CHECK(std::abs(log_likelihood(mle_fit(lc1, s.g), lc1) - (-1.909543)) < 1e-6);
  CHECK(log_likelihood(mle_fit(lc1, s.g), lc1) ==
        doctest::Approx(2 * std::log(2.0 / 3) + std::log(1.0 / 3)).epsilon(1e-12));
  const auto lc0 = layer_counts(s.tc, s.g, 0);
  CHECK(std::abs(log_likelihood(mle_fit(lc0, s.g), lc0) - (-6.068426)) < 1e-6);

  const auto empty_tc = count_transitions(PathDataset{}, s.g, 1);
  const auto empty = layer_counts(empty_tc, s.g, 1);
  CHECK(log_likelihood(mle_fit(empty, s.g), empty) == 0.0);
  CHECK_THROWS_AS(log_likelihood(mle_fit(lc0, s.g), lc1), UsageError);

  // positive count on a zero probability
  MultiOrderParams zero(0, s.g.node_count());
  zero.set(History{}, {0.0, 0.5, 0.5});
  CHECK(log_likelihood(zero, lc0) == -std::numeric_limits<double>::infinity());
}

TEST_CASE("posterior update examples") {
  const auto g = fixtures::graph("a,b\na,c\nb,a\nc,a\n");
  const auto d = fixtures::paths("a,b\na,b\na,c\n", g);
  const auto lc = layer_counts(count_transitions(d, g, 1), g, 1);
  const auto post = posterior_update(DirichletPosterior(1, g.node_count()), lc);
  CHECK(post.alpha(nodes(g, {"a"}), 2) == std::vector<double>{3.0, 2.0});
  CHECK(post.alpha(nodes(g, {"b"}), 1) == std::vector<double>{1.0});
  CHECK(post.alpha(History{}, 3) == std::vector<double>{4.0, 1.0, 1.0});

  const auto two = posterior_update(DirichletPosterior(1, g.node_count(), 2.0),
                                    layer_counts(count_transitions(fixtures::paths("a,b,5\n", g, true), g, 1), g, 1));
  CHECK(two.alpha(nodes(g, {"a"}), 2) == std::vector<double>{7.0, 2.0});
}

TEST_CASE("log marginal likelihood examples") {
  Star s;
  const DirichletPosterior flat1(1, s.g.node_count());
  const DirichletPosterior flat0(0, s.g.node_count());
  const double k1 = log_marginal_likelihood(flat1, layer_counts(s.tc, s.g, 1));
  const double k0 = log_marginal_likelihood(flat0, layer_counts(s.tc, s.g, 0));
  CHECK(std::abs(k1 - std::log(1.0 / 120)) < 1e-9);
  CHECK(std::abs(k0 - std::log(1.0 / 1680)) < 1e-9);
  CHECK(std::abs(k1 - (-4.787492)) < 1e-6);
  CHECK(std::abs(k0 - (-7.426549)) < 1e-6);
  const auto empty = count_transitions(PathDataset{}, s.g, 2);
  for (std::size_t K = 0; K <= 2; ++K) {
    CHECK(log_marginal_likelihood(DirichletPosterior(K, s.g.node_count()), layer_counts(empty, s.g, K)) == 0.0);
  }
}

TEST_CASE("sequence log probability") {
  const auto cyc = fixtures::cycle();
  MultiOrderParams p(1, cyc.node_count());
  p.set(History{}, {1.0 / 3, 1.0 / 3, 1.0 / 3});
  CHECK(sequence_log_probability(p, cyc, nodes(cyc, {"a", "b", "c"})) == doctest::Approx(std::log(1.0 / 3)));
  CHECK_THROWS_AS(sequence_log_probability(p, cyc, nodes(cyc, {"a", "c"})), DomainError);

  const auto star = fixtures::star();
  MultiOrderParams k0(0, star.node_count());
  k0.set(History{}, {0.5, 1.0 / 3, 1.0 / 6});
  CHECK(sequence_log_probability(k0, star, nodes(star, {"a", "b"})) ==
        doctest::Approx(std::log(0.5) + std::log(1.0 / 3)));
}

TEST_CASE("summed sequence probabilities reproduce the log likelihood") {
  const auto g = random_gnm(10, 18, 21);
  const auto gt = sample_ground_truth(g, 2, 22);
  const auto d = generate_paths(gt, 3000, PathLengthLaw::uniform(1, 8), 23);
  const auto tc = count_transitions(d, g, 3);
  for (std::size_t K = 0; K <= 3; ++K) {
    const auto lc = layer_counts(tc, g, K);
    const auto p = mle_fit(lc, g);
    double sum = 0;
    for (const auto& path : d.paths()) {
      sum += static_cast<double>(path.frequency) * sequence_log_probability(p, g, path.nodes);
    }
    CHECK(std::abs(sum - log_likelihood(p, lc)) < 1e-9 * std::max(1.0, std::abs(sum)));
  }
}

TEST_CASE("mle optimality, nestedness and marginal bound") {
  const auto g = random_gnm(8, 14, 31);
  const auto gt = sample_ground_truth(g, 1, 32);
  const auto d = generate_paths(gt, 800, PathLengthLaw::uniform(2, 6), 33);
  const auto tc = count_transitions(d, g, 3);
  double prev = -std::numeric_limits<double>::infinity();
  for (std::size_t K = 0; K <= 3; ++K) {
    const auto lc = layer_counts(tc, g, K);
    const auto mle = mle_fit(lc, g);
    const double ll = log_likelihood(mle, lc);
    CHECK(ll >= prev - 1e-9);
    prev = ll;
    CHECK(log_marginal_likelihood(DirichletPosterior(K, g.node_count()), lc) <= ll);

    // perturb every stored row towards a random simplex point
    std::mt19937_64 gen(K);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
      MultiOrderParams q(K, g.node_count());
      const double eps = 0.2 * unit(gen);
      for (const auto& layer : lc.layers) {
        for (const auto& hc : layer) {
          auto v = *mle.find(hc.history);
          std::vector<double> r(v.size());
          double rs = 0;
          for (auto& x : r) rs += (x = unit(gen));
          for (std::size_t i = 0; i < v.size(); ++i) v[i] = (1 - eps) * v[i] + eps * r[i] / rs;
          q.set(hc.history, v);
        }
      }
      CHECK(log_likelihood(q, lc) <= ll + 1e-9);
    }
  }
}

TEST_CASE("posterior additivity") {
  const auto g = random_gnm(9, 15, 41);
  const auto gt = sample_ground_truth(g, 2, 42);
  const auto d1 = generate_paths(gt, 400, PathLengthLaw::constant(4), 43);
  const auto d2 = generate_paths(gt, 600, PathLengthLaw::constant(4), 44);
  PathDataset both = d1;
  for (const auto& p : d2.paths()) both.add(p);
  const std::size_t K = 2;
  const auto lc1 = layer_counts(count_transitions(d1, g, K), g, K);
  const auto lc2 = layer_counts(count_transitions(d2, g, K), g, K);
  const auto lcb = layer_counts(count_transitions(both, g, K), g, K);
  const DirichletPosterior prior(K, g.node_count(), 0.5);
  const auto seq = posterior_update(posterior_update(prior, lc1), lc2);
  const auto once = posterior_update(prior, lcb);
  CHECK(posterior_to_json(seq, g) == posterior_to_json(once, g));
}

TEST_CASE("log marginal agrees with an lgamma evaluation") {
  const auto g = random_gnm(10, 20, 51);
  const auto gt = sample_ground_truth(g, 2, 52);
  const auto d = generate_paths(gt, 2000, PathLengthLaw::constant(5), 53);
  const auto tc = count_transitions(d, g, 3);
  for (double alpha0 : {0.3, 1.0, 4.0}) {
    for (std::size_t K = 0; K <= 3; ++K) {
      const auto lc = layer_counts(tc, g, K);
      std::vector<std::vector<std::uint64_t>> rows;
      for (const auto& layer : lc.layers) {
        for (const auto& hc : layer) rows.push_back(hc.dense());
      }
      const double expected = oracle::exact_log_marginal(rows, alpha0);
      CHECK(log_marginal_likelihood(DirichletPosterior(K, g.node_count(), alpha0), lc) ==
            doctest::Approx(expected).epsilon(1e-10));
    }
  }
}

TEST_CASE("sample_params moments") {
  const auto g = fixtures::graph("a,b\na,c\nb,a\nc,a\n");
  DirichletPosterior post(1, g.node_count());
  post.set(nodes(g, {"a"}), {3.0, 2.0});
  Rng rng(61);
  double mean_a = 0, mean_eps = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const auto p = sample_params(post, g, rng);
    CHECK(*p.find(nodes(g, {"b"})) == std::vector<double>{1.0});
    mean_a += (*p.find(nodes(g, {"a"})))[0];
    mean_eps += (*p.find(History{}))[0];
  }
  CHECK(std::abs(mean_a / n - 0.6) < 0.01);
  CHECK(std::abs(mean_eps / n - 1.0 / 3) < 0.01);
}

TEST_CASE("model json round trip") {
  const auto g = random_gnm(8, 12, 71);
  const auto gt = sample_ground_truth(g, 2, 72);
  const auto text = params_to_json(gt.params, g);
  const auto back = params_from_json(text, g);
  CHECK(params_to_json(back, g) == text);
  for (std::size_t k = 0; k <= 2; ++k) {
    for (const auto& [key, v] : gt.params.layer(k)) CHECK(*back.find(k, key) == v);
  }
  CHECK_THROWS(params_from_json("{\"max_order\": 1, \"layers\": [{\"zz\": [1.0]}, {}]}", g));
}
