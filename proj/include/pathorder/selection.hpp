#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "pathorder/constraint.hpp"
#include "pathorder/pathdata.hpp"

namespace pathorder {

enum class PriorKind { uniform, exponential_df };

/// Prior over the candidate maximum orders 0..K_max.
struct OrderPrior {
  PriorKind kind = PriorKind::uniform;

  /// Normalized log-probabilities over the support given each order's total df.
  std::vector<double> log_probabilities(std::span<const std::uint64_t> df_totals) const;

  static OrderPrior parse(std::string_view name);  // "uniform" | "exp-df"
  std::string name() const;
};

enum class EvidenceLevel { positive, very_strong };

/// Bayes-factor threshold: 3 for positive, 150 for very strong evidence.
struct EvidenceThreshold {
  EvidenceLevel level = EvidenceLevel::very_strong;

  double value() const noexcept { return level == EvidenceLevel::positive ? 3.0 : 150.0; }
  static EvidenceThreshold parse(std::string_view name);  // "positive" | "very_strong"
  std::string name() const;
};

enum class Criterion { aic, bic, edc };
enum class LrMode { all, adjacent };

LrMode parse_lr_mode(std::string_view name);

struct OrderScore {
  std::size_t order = 0;
  std::uint64_t df = 0;
  double log_likelihood = 0.0;
  double log_marginal = 0.0;
  double aic = 0.0;
  double bic = 0.0;
  double edc = 0.0;
};

/// Likelihood-ratio comparison of orders K < K'. xi = 0 marks a degenerate pair.
struct PairTest {
  std::size_t order = 0;
  std::size_t order_prime = 0;
  double statistic = 0.0;
  std::uint64_t xi = 0;
  double p_value = 1.0;
};

/// Scores of every candidate order plus derived p-values and chosen orders.
/// All log quantities omit the dataset constant ln Z.
struct SelectionReport {
  std::vector<OrderScore> scores;  // index = order
  std::uint64_t n_total = 0;
  std::size_t node_count = 0;
  bool bic_available = true;
  bool edc_available = true;
  std::vector<PairTest> pvalues;
  std::vector<std::pair<std::string, std::size_t>> chosen;  // in the order methods were applied

  std::size_t max_order() const noexcept { return scores.empty() ? 0 : scores.size() - 1; }
};

/// Fits orders 0..K_max (MLE and flat-prior evidence with concentration alpha0)
/// and fills AIC, BIC, EDC and the pairwise LR tests.
SelectionReport score_all(const TransitionCounts& tc, const NetworkConstraint& g, std::size_t K_max,
                          double alpha0 = 1.0);

/// Argmin of the criterion; ties go to the smaller order.
std::size_t select_ic(const SelectionReport& report, Criterion criterion);
std::size_t argmin_order(std::span<const double> scores);

/// p-value of K against K' (K < K'). Throws DegenerateTestError when df are equal.
double lr_test(const SelectionReport& report, std::size_t K, std::size_t K_prime);
PairTest lr_pair(const OrderScore& lower, const OrderScore& upper);

/// `all`: largest K' whose p-value against every smaller order is below p_thres.
/// `adjacent`: step up from 0 while p(K, K+1) < p_thres.
std::size_t select_lr(const SelectionReport& report, double p_thres, LrMode mode = LrMode::all);
std::size_t select_lr(std::span<const PairTest> tests, std::size_t K_max, double p_thres,
                      LrMode mode = LrMode::all);

/// Largest K' whose log-posterior exceeds every smaller order's by ln(threshold).
std::size_t select_bf(const SelectionReport& report, const OrderPrior& prior, const EvidenceThreshold& threshold);
std::size_t select_bf(std::span<const double> log_marginal, std::span<const std::uint64_t> df_totals,
                      const OrderPrior& prior, const EvidenceThreshold& threshold);

/// Wilson score interval for a binomial proportion, clamped to [0, 1].
std::pair<double, double> wilson_interval(std::uint64_t successes, std::uint64_t trials, double z = 1.959964);

/// `K,df,log_likelihood,log_marginal,aic,bic,edc`
void write_report_csv(std::ostream& out, const SelectionReport& report);
/// `K,K_prime,x,xi,p_value`
void write_pvalues_csv(std::ostream& out, const SelectionReport& report);
/// One `method=K` line per chosen order.
void write_chosen(std::ostream& out, const SelectionReport& report);

/// Shortest round-trip decimal form of a double ("nan", "inf", "-inf" for specials).
std::string format_double(double x);

}  // namespace pathorder
