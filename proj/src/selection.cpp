#include "pathorder/selection.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>

#include "pathorder/errors.hpp"
#include "pathorder/model.hpp"
#include "pathorder/numerics.hpp"

namespace pathorder {

std::vector<double> OrderPrior::log_probabilities(std::span<const std::uint64_t> df_totals) const {
  const std::size_t n = df_totals.size();
  std::vector<double> out(n);
  if (n == 0) return out;
  if (kind == PriorKind::uniform) {
    std::fill(out.begin(), out.end(), -std::log(static_cast<double>(n)));
    return out;
  }
  // kappa(K) proportional to exp(-df(K))
  for (std::size_t i = 0; i < n; ++i) out[i] = -static_cast<double>(df_totals[i]);
  const double top = *std::max_element(out.begin(), out.end());
  double sum = 0.0;
  for (double x : out) sum += std::exp(x - top);
  const double log_norm = top + std::log(sum);
  for (double& x : out) x -= log_norm;
  return out;
}

OrderPrior OrderPrior::parse(std::string_view name) {
  if (name == "uniform") return {PriorKind::uniform};
  if (name == "exp-df" || name == "exponential_df") return {PriorKind::exponential_df};
  throw UsageError("unknown order prior '" + std::string(name) + "' (expected uniform or exp-df)");
}

std::string OrderPrior::name() const { return kind == PriorKind::uniform ? "uniform" : "exp-df"; }

EvidenceThreshold EvidenceThreshold::parse(std::string_view name) {
  if (name == "positive") return {EvidenceLevel::positive};
  if (name == "very_strong" || name == "very-strong") return {EvidenceLevel::very_strong};
  throw UsageError("unknown evidence level '" + std::string(name) + "' (expected positive or very_strong)");
}

std::string EvidenceThreshold::name() const { return level == EvidenceLevel::positive ? "positive" : "very_strong"; }

LrMode parse_lr_mode(std::string_view name) {
  if (name == "all") return LrMode::all;
  if (name == "adjacent") return LrMode::adjacent;
  throw UsageError("unknown LR mode '" + std::string(name) + "' (expected all or adjacent)");
}

PairTest lr_pair(const OrderScore& lower, const OrderScore& upper) {
  PairTest t;
  t.order = lower.order;
  t.order_prime = upper.order;
  t.statistic = std::max(0.0, -2.0 * (lower.log_likelihood - upper.log_likelihood));
  t.xi = upper.df > lower.df ? upper.df - lower.df : 0;
  t.p_value = t.xi == 0 ? 1.0 : numerics::chi_square_survival(t.statistic, static_cast<double>(t.xi));
  return t;
}

SelectionReport score_all(const TransitionCounts& tc, const NetworkConstraint& g, std::size_t K_max,
                          double alpha0) {
  if (K_max > tc.max_order()) {
    throw UsageError("maximum order " + std::to_string(K_max) + " exceeds counted order " +
                     std::to_string(tc.max_order()));
  }
  SelectionReport report;
  report.n_total = tc.n_total();
  report.node_count = g.node_count();
  report.bic_available = report.n_total > 1;
  report.edc_available = report.n_total > 1 && report.node_count > 1;

  const auto df = degrees_of_freedom(g, K_max);
  const double n = static_cast<double>(report.n_total);
  const double log_n = report.bic_available ? std::log(n) : std::numeric_limits<double>::quiet_NaN();
  const double edc_penalty = report.edc_available
                                 ? std::log(std::log(n)) / static_cast<double>(report.node_count - 1)
                                 : std::numeric_limits<double>::quiet_NaN();

  for (std::size_t K = 0; K <= K_max; ++K) {
    const auto lc = layer_counts(tc, g, K);
    OrderScore s;
    s.order = K;
    s.df = df.total(K);
    s.log_likelihood = log_likelihood(mle_fit(lc, g), lc);
    s.log_marginal = log_marginal_likelihood(DirichletPosterior(K, g.node_count(), alpha0), lc);
    const double dfd = static_cast<double>(s.df);
    s.aic = -2.0 * s.log_likelihood + 2.0 * dfd;
    s.bic = -2.0 * s.log_likelihood + dfd * log_n;
    s.edc = -2.0 * s.log_likelihood + dfd * edc_penalty;
    report.scores.push_back(s);
  }
  for (std::size_t K = 0; K <= K_max; ++K) {
    for (std::size_t Kp = K + 1; Kp <= K_max; ++Kp) {
      report.pvalues.push_back(lr_pair(report.scores[K], report.scores[Kp]));
    }
  }
  return report;
}

std::size_t argmin_order(std::span<const double> scores) {
  std::size_t best = 0;
  for (std::size_t K = 1; K < scores.size(); ++K) {
    if (scores[K] < scores[best]) best = K;
  }
  return best;
}

std::size_t select_ic(const SelectionReport& report, Criterion criterion) {
  if (criterion == Criterion::bic && !report.bic_available) throw UsageError("BIC unavailable for n_total <= 1");
  if (criterion == Criterion::edc && !report.edc_available) {
    throw UsageError("EDC unavailable for n_total <= 1 or a single node");
  }
  std::vector<double> values;
  values.reserve(report.scores.size());
  for (const auto& s : report.scores) {
    values.push_back(criterion == Criterion::aic ? s.aic : criterion == Criterion::bic ? s.bic : s.edc);
  }
  return argmin_order(values);
}

double lr_test(const SelectionReport& report, std::size_t K, std::size_t K_prime) {
  if (!(K < K_prime) || K_prime > report.max_order()) throw UsageError("lr_test requires K < K' <= K_max");
  const auto t = lr_pair(report.scores[K], report.scores[K_prime]);
  if (t.xi == 0) {
    throw DegenerateTestError("orders " + std::to_string(K) + " and " + std::to_string(K_prime) +
                              " have the same degrees of freedom");
  }
  return t.p_value;
}

namespace {

double lookup_p(std::span<const PairTest> tests, std::size_t K, std::size_t Kp) {
  for (const auto& t : tests) {
    if (t.order == K && t.order_prime == Kp) return t.p_value;
  }
  return 1.0;
}

}  // namespace

std::size_t select_lr(std::span<const PairTest> tests, std::size_t K_max, double p_thres, LrMode mode) {
  if (!(p_thres > 0.0 && p_thres < 1.0)) throw UsageError("p threshold must lie in (0, 1)");
  if (mode == LrMode::adjacent) {
    std::size_t K = 0;
    while (K < K_max && lookup_p(tests, K, K + 1) < p_thres) ++K;
    return K;
  }
  for (std::size_t Kp = K_max; Kp > 0; --Kp) {
    bool significant = true;
    for (std::size_t K = 0; K < Kp && significant; ++K) significant = lookup_p(tests, K, Kp) < p_thres;
    if (significant) return Kp;
  }
  return 0;
}

std::size_t select_lr(const SelectionReport& report, double p_thres, LrMode mode) {
  return select_lr(report.pvalues, report.max_order(), p_thres, mode);
}

std::size_t select_bf(std::span<const double> log_marginal, std::span<const std::uint64_t> df_totals,
                      const OrderPrior& prior, const EvidenceThreshold& threshold) {
  if (log_marginal.size() != df_totals.size()) throw UsageError("select_bf: size mismatch");
  const auto log_prior = prior.log_probabilities(df_totals);
  std::vector<double> log_post(log_marginal.size());
  for (std::size_t K = 0; K < log_post.size(); ++K) log_post[K] = log_marginal[K] + log_prior[K];
  const double log_threshold = std::log(threshold.value());
  for (std::size_t Kp = log_post.size(); Kp-- > 1;) {
    bool significant = true;
    for (std::size_t K = 0; K < Kp && significant; ++K) significant = log_post[Kp] - log_post[K] > log_threshold;
    if (significant) return Kp;
  }
  return 0;
}

std::size_t select_bf(const SelectionReport& report, const OrderPrior& prior, const EvidenceThreshold& threshold) {
  std::vector<double> lm;
  std::vector<std::uint64_t> df;
  for (const auto& s : report.scores) {
    lm.push_back(s.log_marginal);
    df.push_back(s.df);
  }
  return select_bf(lm, df, prior, threshold);
}

std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double z) {
  if (trials == 0) throw UsageError("wilson_interval: trials must be positive");
  if (successes > trials) throw UsageError("wilson_interval: successes exceed trials");
  const double n = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / n;
  const double z2 = z * z;
  const double denom = 1.0 + z2 / n;
  const double center = (p + z2 / (2.0 * n)) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
  // the bounds at 0 and n are exactly 0 and 1; exact in theory, not after rounding
  const double lo = successes == 0 ? 0.0 : std::clamp(center - half, 0.0, 1.0);
  const double hi = successes == trials ? 1.0 : std::clamp(center + half, 0.0, 1.0);
  return {lo, hi};
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, ptr);
}

void write_report_csv(std::ostream& out, const SelectionReport& report) {
  out << "K,df,log_likelihood,log_marginal,aic,bic,edc\n";
  for (const auto& s : report.scores) {
    out << s.order << ',' << s.df << ',' << format_double(s.log_likelihood) << ',' << format_double(s.log_marginal)
        << ',' << format_double(s.aic) << ',' << format_double(s.bic) << ',' << format_double(s.edc) << '\n';
  }
}

void write_pvalues_csv(std::ostream& out, const SelectionReport& report) {
  out << "K,K_prime,x,xi,p_value\n";
  for (const auto& t : report.pvalues) {
    out << t.order << ',' << t.order_prime << ',' << format_double(t.statistic) << ',' << t.xi << ','
        << format_double(t.p_value) << '\n';
  }
}

void write_chosen(std::ostream& out, const SelectionReport& report) {
  for (const auto& [method, K] : report.chosen) out << method << '=' << K << '\n';
}

}  // namespace pathorder
