#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "pathorder/selection.hpp"
#include "pathorder/synth.hpp"

namespace pathorder {

/// One order-selection method with its thresholds, e.g. "lr:0.05" or "bf:very_strong:exp-df".
struct MethodSpec {
  enum class Kind { aic, bic, edc, lr, bf };
  Kind kind = Kind::aic;
  double p_thres = 0.05;
  EvidenceThreshold evidence{};
  OrderPrior prior{};

  /// Grammar: aic | bic | edc | lr[:p] | bf[:positive|very_strong][:uniform|exp-df].
  /// A bf method without an explicit prior takes `default_prior`.
  static MethodSpec parse(std::string_view text, OrderPrior default_prior = {});

  /// Display name used in result files: aic, lr(0.05), bf(very_strong), bf-expdf(positive), ...
  std::string name() const;

  std::size_t apply(const SelectionReport& report, LrMode lr_mode) const;
};

enum class ConstraintMode { true_graph, perturbed, complete };

ConstraintMode parse_constraint_mode(std::string_view text);
std::string to_string(ConstraintMode mode);

struct ExperimentConfig {
  std::size_t n = 100;
  std::size_t m = 350;
  std::size_t k_gt = 2;
  std::size_t k_max = 4;
  std::vector<std::uint64_t> data_sizes;
  std::size_t replications = 1;
  std::vector<MethodSpec> methods;
  OrderPrior prior{};
  double alpha0 = 1.0;
  std::size_t perturb_extra_m = 0;
  ConstraintMode constraint_mode = ConstraintMode::true_graph;
  std::optional<PathLengthLaw> length_law;  // default: constant k_gt + 3
  std::uint64_t master_seed = 0;
  LrMode lr_mode = LrMode::all;
  double z = 1.959964;

  PathLengthLaw effective_length_law() const {
    return length_law ? *length_law : PathLengthLaw::default_for(k_gt);
  }

  /// Throws UsageError naming the offending field.
  void validate() const;
};

/// A TOML scalar or array of scalars.
struct ConfigValue {
  enum class Type { integer, real, boolean, string, array };
  Type type = Type::integer;
  std::int64_t integer = 0;
  double real = 0.0;
  bool boolean = false;
  std::string string;
  std::vector<ConfigValue> array;

  /// Parses one TOML value literal.
  static ConfigValue parse(std::string_view text);
};

/// Flat `key = value` TOML subset: comments, strings, integers, floats, booleans,
/// single-line arrays. Section headers are rejected.
std::map<std::string, ConfigValue> parse_toml(std::istream& in);

/// Applies key/value pairs onto `config`; unknown keys and bad types raise UsageError.
void apply_config_values(ExperimentConfig& config, const std::map<std::string, ConfigValue>& values);

ExperimentConfig parse_config(std::istream& in);
ExperimentConfig read_config(const std::string& path);
/// Canonical TOML rendering (also the input of the config hash).
std::string config_to_toml(const ExperimentConfig& config);

/// `points_per_decade` log-spaced integer sizes from lo to hi inclusive, deduplicated.
std::vector<std::uint64_t> log_spaced_grid(std::uint64_t lo, std::uint64_t hi, std::size_t points_per_decade = 12);

struct ResultRecord {
  std::string method;
  std::uint64_t data_size = 0;
  std::size_t replication = 0;
  std::uint64_t seed = 0;
  std::uint64_t n_total = 0;
  std::optional<std::size_t> selected_k;  // empty when the replication failed
  std::string error;

  bool failed() const noexcept { return !selected_k.has_value(); }
};

/// Seed of replication `rep` at grid position `size_index`.
std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t size_index, std::size_t rep);

/// Runs every (data size, replication) task and applies every method.
/// Results are ordered by size, replication, then method, and do not depend on `workers`.
std::vector<ResultRecord> run(const ExperimentConfig& config, std::size_t workers = 1,
                              const std::function<void(std::size_t done, std::size_t total)>& progress = {});

/// Scores of one replication (exposed for tests and the Python module).
SelectionReport run_replication(const ExperimentConfig& config, std::uint64_t data_size, std::uint64_t seed,
                                std::uint64_t* n_total = nullptr);

struct FrequencyRow {
  std::string method;
  std::uint64_t data_size = 0;
  std::size_t order = 0;
  std::uint64_t count = 0;
  std::uint64_t total = 0;
  double frequency = 0.0;
  double wilson_lo = 0.0;
  double wilson_hi = 0.0;
};

/// Per (method, size, K) selection frequencies over non-failed records, K = 0..k_max.
std::vector<FrequencyRow> aggregate(const std::vector<ResultRecord>& records, std::size_t k_max,
                                    double z = 1.959964);

struct DetectionRange {
  std::string method;
  std::optional<std::uint64_t> min_size;
  std::optional<std::uint64_t> max_size;
};

/// Longest contiguous run of grid sizes where the method recovers the true order
/// in every replication. LR methods instead require no underfitting and an
/// overfitting frequency below their p threshold.
std::vector<DetectionRange> detection_ranges(const std::vector<ResultRecord>& records,
                                             const ExperimentConfig& config);

void write_results_csv(std::ostream& out, const std::vector<ResultRecord>& records);
std::vector<ResultRecord> read_results_csv(std::istream& in);
void write_frequency_csv(std::ostream& out, const std::vector<FrequencyRow>& table);
void write_ranges_csv(std::ostream& out, const std::vector<DetectionRange>& ranges);
/// Frequency-vs-size figure: one panel per method, log x axis, Wilson bands.
void write_svg(std::ostream& out, const std::vector<FrequencyRow>& table);

/// FNV-1a 64-bit hash, hex encoded.
std::string fnv1a_hex(std::string_view text);

}  // namespace pathorder
