#include "pathorder/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <sstream>
#include <thread>

#include "pathorder/errors.hpp"
#include "text.hpp"

namespace pathorder {

MethodSpec MethodSpec::parse(std::string_view spec, OrderPrior default_prior) {
  const auto parts = text::split(spec, ':');
  MethodSpec m;
  m.prior = default_prior;
  const auto head = parts[0];
  auto bad = [&] { return UsageError("invalid method '" + std::string(spec) + "'"); };
  if (head == "aic" || head == "bic" || head == "edc") {
    if (parts.size() != 1) throw bad();
    m.kind = head == "aic" ? Kind::aic : head == "bic" ? Kind::bic : Kind::edc;
    return m;
  }
  if (head == "lr") {
    m.kind = Kind::lr;
    if (parts.size() > 2) throw bad();
    if (parts.size() == 2) {
      const auto [ptr, ec] = std::from_chars(parts[1].data(), parts[1].data() + parts[1].size(), m.p_thres);
      if (ec != std::errc{} || ptr != parts[1].data() + parts[1].size()) throw bad();
    }
    if (!(m.p_thres > 0.0 && m.p_thres < 1.0)) throw UsageError("LR threshold must lie in (0, 1)");
    return m;
  }
  if (head == "bf") {
    m.kind = Kind::bf;
    if (parts.size() > 3) throw bad();
    if (parts.size() >= 2) m.evidence = EvidenceThreshold::parse(parts[1]);
    if (parts.size() == 3) m.prior = OrderPrior::parse(parts[2]);
    return m;
  }
  throw bad();
}

std::string MethodSpec::name() const {
  switch (kind) {
    case Kind::aic: return "aic";
    case Kind::bic: return "bic";
    case Kind::edc: return "edc";
    case Kind::lr: return "lr(" + format_double(p_thres) + ")";
    case Kind::bf:
      return std::string(prior.kind == PriorKind::uniform ? "bf" : "bf-expdf") + "(" + evidence.name() + ")";
  }
  return {};
}

std::size_t MethodSpec::apply(const SelectionReport& report, LrMode lr_mode) const {
  switch (kind) {
    case Kind::aic: return select_ic(report, Criterion::aic);
    case Kind::bic: return select_ic(report, Criterion::bic);
    case Kind::edc: return select_ic(report, Criterion::edc);
    case Kind::lr: return select_lr(report, p_thres, lr_mode);
    case Kind::bf: return select_bf(report, prior, evidence);
  }
  return 0;
}

ConstraintMode parse_constraint_mode(std::string_view text) {
  if (text == "true_graph" || text == "true") return ConstraintMode::true_graph;
  if (text == "perturbed") return ConstraintMode::perturbed;
  if (text == "complete") return ConstraintMode::complete;
  throw UsageError("unknown constraint mode '" + std::string(text) + "' (expected true_graph, perturbed or complete)");
}

std::string to_string(ConstraintMode mode) {
  switch (mode) {
    case ConstraintMode::true_graph: return "true_graph";
    case ConstraintMode::perturbed: return "perturbed";
    case ConstraintMode::complete: return "complete";
  }
  return {};
}

void ExperimentConfig::validate() const {
  auto fail = [](const std::string& field, const std::string& why) {
    throw UsageError("config field '" + field + "': " + why);
  };
  if (n < 2) fail("n", "need at least two nodes");
  if (m > n * (n - 1) / 2) fail("m", "exceeds n(n-1)/2");
  if (k_max < k_gt) fail("k_max", "must be at least k_gt");
  if (replications < 1) fail("replications", "must be at least 1");
  if (data_sizes.empty()) fail("data_sizes", "empty grid");
  for (std::size_t i = 0; i < data_sizes.size(); ++i) {
    if (data_sizes[i] < 1) fail("data_sizes", "sizes must be positive");
    if (i > 0 && data_sizes[i] <= data_sizes[i - 1]) fail("data_sizes", "must be strictly increasing");
  }
  if (methods.empty()) fail("methods", "no methods configured");
  if (!(alpha0 > 0.0)) fail("alpha0", "must be positive");
  if (!(z > 0.0)) fail("z", "must be positive");
  if (constraint_mode == ConstraintMode::perturbed) {
    // the union graph can hold at most n(n-1) directed non-loop edges, 2m of them taken
    if (perturb_extra_m > n * (n - 1) - 2 * m) fail("perturb_extra_m", "more edges than absent directed pairs");
  } else if (perturb_extra_m != 0 && constraint_mode != ConstraintMode::perturbed) {
    fail("perturb_extra_m", "only valid with constraint_mode = \"perturbed\"");
  }
  HistoryCodec(n).require_length(k_max);
}

std::uint64_t replication_seed(std::uint64_t master_seed, std::size_t size_index, std::size_t rep) {
  return derive_seed(derive_seed(master_seed, size_index), rep);
}

namespace {

enum Stream : std::uint64_t { kGraph = 0, kModel = 1, kPaths = 2, kPerturb = 3 };

NetworkConstraint fitting_constraint(const ExperimentConfig& config, const NetworkConstraint& g, std::uint64_t seed) {
  switch (config.constraint_mode) {
    case ConstraintMode::true_graph: return g;
    case ConstraintMode::perturbed:
      return perturb_constraint(g, config.perturb_extra_m, derive_seed(seed, kPerturb)).fitting_graph();
    case ConstraintMode::complete: {
      std::vector<std::string> labels(g.labels().begin(), g.labels().end());
      return complete_digraph(std::move(labels), true);
    }
  }
  return g;
}

}  // namespace

SelectionReport run_replication(const ExperimentConfig& config, std::uint64_t data_size, std::uint64_t seed,
                                std::uint64_t* n_total) {
  const auto g = random_gnm(config.n, config.m, derive_seed(seed, kGraph));
  if (g.empty()) throw DomainError("generated graph is empty after pruning dead ends");
  const auto gt = sample_ground_truth(g, config.k_gt, derive_seed(seed, kModel));
  const auto data = generate_paths(gt, data_size, config.effective_length_law(), derive_seed(seed, kPaths));
  const auto fit_graph = fitting_constraint(config, g, seed);
  validate(data, fit_graph);
  if (n_total) *n_total = data.n_total();
  const auto tc = count_transitions(data, fit_graph, config.k_max);
  return score_all(tc, fit_graph, config.k_max, config.alpha0);
}

std::vector<ResultRecord> run(const ExperimentConfig& config, std::size_t workers,
                              const std::function<void(std::size_t, std::size_t)>& progress) {
  config.validate();
  const std::size_t n_tasks = config.data_sizes.size() * config.replications;
  std::vector<std::vector<ResultRecord>> slots(n_tasks);

  auto run_task = [&](std::size_t task) {
    const std::size_t size_index = task / config.replications;
    const std::size_t rep = task % config.replications;
    const std::uint64_t size = config.data_sizes[size_index];
    const std::uint64_t seed = replication_seed(config.master_seed, size_index, rep);
    auto& out = slots[task];
    auto make = [&](const MethodSpec& m) {
      ResultRecord r;
      r.method = m.name();
      r.data_size = size;
      r.replication = rep;
      r.seed = seed;
      return r;
    };
    try {
      std::uint64_t n_total = 0;
      const auto report = run_replication(config, size, seed, &n_total);
      for (const auto& m : config.methods) {
        auto r = make(m);
        r.n_total = n_total;
        try {
          r.selected_k = m.apply(report, config.lr_mode);
        } catch (const Error& e) {
          r.error = e.what();
        }
        out.push_back(std::move(r));
      }
    } catch (const Error& e) {
      for (const auto& m : config.methods) {
        auto r = make(m);
        r.error = e.what();
        out.push_back(std::move(r));
      }
    }
  };

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> done{0};
  std::mutex progress_mutex;
  auto worker = [&] {
    for (std::size_t task; (task = next.fetch_add(1)) < n_tasks;) {
      run_task(task);
      const std::size_t finished = ++done;
      if (progress) {
        std::lock_guard lock(progress_mutex);
        progress(finished, n_tasks);
      }
    }
  };
  workers = std::max<std::size_t>(1, std::min(workers, n_tasks));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
  }

  std::vector<ResultRecord> records;
  records.reserve(n_tasks * config.methods.size());
  for (auto& slot : slots) {
    for (auto& r : slot) records.push_back(std::move(r));
  }
  return records;
}

namespace {

std::vector<std::string> method_order(const std::vector<ResultRecord>& records) {
  std::vector<std::string> order;
  std::set<std::string> seen;
  for (const auto& r : records) {
    if (seen.insert(r.method).second) order.push_back(r.method);
  }
  return order;
}

struct Tally {
  std::vector<std::uint64_t> per_order;
  std::uint64_t total = 0;
};

// (method, size) -> counts per selected order
std::map<std::pair<std::string, std::uint64_t>, Tally> tally(const std::vector<ResultRecord>& records,
                                                             std::size_t k_max) {
  std::map<std::pair<std::string, std::uint64_t>, Tally> out;
  for (const auto& r : records) {
    auto& t = out[{r.method, r.data_size}];
    if (t.per_order.empty()) t.per_order.assign(k_max + 1, 0);
    if (r.failed()) continue;
    if (*r.selected_k > k_max) throw UsageError("selected order exceeds k_max");
    ++t.per_order[*r.selected_k];
    ++t.total;
  }
  return out;
}

}  // namespace

std::vector<FrequencyRow> aggregate(const std::vector<ResultRecord>& records, std::size_t k_max, double z) {
  std::vector<FrequencyRow> table;
  const auto counts = tally(records, k_max);
  std::set<std::uint64_t> sizes;
  for (const auto& r : records) sizes.insert(r.data_size);
  for (const auto& method : method_order(records)) {
    for (std::uint64_t size : sizes) {
      const auto it = counts.find({method, size});
      if (it == counts.end() || it->second.total == 0) continue;
      const auto& t = it->second;
      for (std::size_t K = 0; K <= k_max; ++K) {
        FrequencyRow row;
        row.method = method;
        row.data_size = size;
        row.order = K;
        row.count = t.per_order[K];
        row.total = t.total;
        row.frequency = static_cast<double>(row.count) / static_cast<double>(row.total);
        std::tie(row.wilson_lo, row.wilson_hi) = wilson_interval(row.count, row.total, z);
        table.push_back(row);
      }
    }
  }
  return table;
}

std::vector<DetectionRange> detection_ranges(const std::vector<ResultRecord>& records,
                                             const ExperimentConfig& config) {
  const auto counts = tally(records, config.k_max);
  std::vector<DetectionRange> out;
  for (const auto& m : config.methods) {
    DetectionRange range;
    range.method = m.name();
    std::size_t best_start = 0;
    std::size_t best_len = 0;
    std::size_t run_start = 0;
    std::size_t run_len = 0;
    for (std::size_t i = 0; i < config.data_sizes.size(); ++i) {
      bool ok = false;
      const auto it = counts.find({range.method, config.data_sizes[i]});
      if (it != counts.end() && it->second.total > 0) {
        const auto& t = it->second;
        if (m.kind == MethodSpec::Kind::lr) {
          std::uint64_t under = 0;
          std::uint64_t over = 0;
          for (std::size_t K = 0; K < config.k_gt; ++K) under += t.per_order[K];
          for (std::size_t K = config.k_gt + 1; K <= config.k_max; ++K) over += t.per_order[K];
          ok = under == 0 && static_cast<double>(over) / static_cast<double>(t.total) < m.p_thres;
        } else {
          ok = t.per_order[config.k_gt] == t.total;
        }
      }
      if (ok) {
        if (run_len == 0) run_start = i;
        ++run_len;
        if (run_len > best_len) {
          best_len = run_len;
          best_start = run_start;
        }
      } else {
        run_len = 0;
      }
    }
    if (best_len > 0) {
      range.min_size = config.data_sizes[best_start];
      range.max_size = config.data_sizes[best_start + best_len - 1];
    }
    out.push_back(std::move(range));
  }
  return out;
}

void write_results_csv(std::ostream& out, const std::vector<ResultRecord>& records) {
  out << "method,data_size,replication,seed,n_total,selected_K,status\n";
  for (const auto& r : records) {
    out << r.method << ',' << r.data_size << ',' << r.replication << ',' << r.seed << ',' << r.n_total << ',';
    if (r.selected_k) out << *r.selected_k;
    out << ',' << (r.failed() ? "failed" : "ok") << '\n';
  }
}

std::vector<ResultRecord> read_results_csv(std::istream& in) {
  std::vector<ResultRecord> records;
  std::string line;
  std::size_t line_no = 0;
  auto number = [&](std::string_view s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) throw ParseError("invalid number '" + std::string(s) + "'", line_no);
    return v;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line_no == 1 || text::skippable(line)) continue;
    const auto f = text::split(line, ',');
    if (f.size() != 7) throw ParseError("expected 7 columns", line_no);
    ResultRecord r;
    r.method = std::string(f[0]);
    r.data_size = number(f[1]);
    r.replication = number(f[2]);
    r.seed = number(f[3]);
    r.n_total = number(f[4]);
    if (f[6] == "ok") {
      r.selected_k = number(f[5]);
    } else if (f[6] == "failed") {
      r.error = "failed";
    } else {
      throw ParseError("unknown status '" + std::string(f[6]) + "'", line_no);
    }
    records.push_back(std::move(r));
  }
  return records;
}

void write_frequency_csv(std::ostream& out, const std::vector<FrequencyRow>& table) {
  out << "method,data_size,K,count,total,frequency,wilson_lo,wilson_hi\n";
  for (const auto& r : table) {
    out << r.method << ',' << r.data_size << ',' << r.order << ',' << r.count << ',' << r.total << ','
        << format_double(r.frequency) << ',' << format_double(r.wilson_lo) << ',' << format_double(r.wilson_hi)
        << '\n';
  }
}

void write_ranges_csv(std::ostream& out, const std::vector<DetectionRange>& ranges) {
  out << "method,min_size,max_size\n";
  for (const auto& r : ranges) {
    out << r.method << ',';
    if (r.min_size) out << *r.min_size;
    out << ',';
    if (r.max_size) out << *r.max_size;
    out << '\n';
  }
}

namespace {

std::string xml_escape(std::string_view s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out.push_back(c);
    }
  }
  return out;
}

std::string fmt(double x) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(2) << x;
  return s.str();
}

constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                                    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

}  // namespace

void write_svg(std::ostream& out, const std::vector<FrequencyRow>& table) {
  constexpr double panel_w = 320, panel_h = 220, margin_l = 50, margin_r = 15, margin_t = 30, margin_b = 40;
  constexpr std::size_t columns = 3;

  std::vector<std::string> methods;
  std::set<std::string> seen;
  std::uint64_t lo = 0, hi = 0;
  std::size_t k_max = 0;
  for (const auto& r : table) {
    if (seen.insert(r.method).second) methods.push_back(r.method);
    lo = lo == 0 ? r.data_size : std::min(lo, r.data_size);
    hi = std::max(hi, r.data_size);
    k_max = std::max(k_max, r.order);
  }
  const std::size_t rows = methods.empty() ? 1 : (methods.size() + columns - 1) / columns;
  const double width = panel_w * static_cast<double>(std::min(columns, std::max<std::size_t>(methods.size(), 1)));
  const double height = panel_h * static_cast<double>(rows) + 30;

  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(width) << "\" height=\"" << fmt(height)
      << "\" viewBox=\"0 0 " << fmt(width) << ' ' << fmt(height) << "\" font-family=\"sans-serif\" font-size=\"11\">\n"
      << "<rect x=\"0\" y=\"0\" width=\"" << fmt(width) << "\" height=\"" << fmt(height) << "\" fill=\"white\"/>\n";

  const double log_lo = std::log10(static_cast<double>(std::max<std::uint64_t>(lo, 1)));
  const double log_hi = std::max(log_lo + 1e-9, std::log10(static_cast<double>(std::max<std::uint64_t>(hi, 1))));
  const double plot_w = panel_w - margin_l - margin_r;
  const double plot_h = panel_h - margin_t - margin_b;

  for (std::size_t p = 0; p < methods.size(); ++p) {
    const double ox = panel_w * static_cast<double>(p % columns) + margin_l;
    const double oy = panel_h * static_cast<double>(p / columns) + margin_t;
    auto sx = [&](std::uint64_t size) {
      const double lx = std::log10(static_cast<double>(size));
      return ox + (lx - log_lo) / (log_hi - log_lo) * plot_w;
    };
    auto sy = [&](double f) { return oy + (1.0 - f) * plot_h; };

    out << "<g>\n<text x=\"" << fmt(ox + plot_w / 2) << "\" y=\"" << fmt(oy - 10)
        << "\" text-anchor=\"middle\" font-weight=\"bold\">" << xml_escape(methods[p]) << "</text>\n"
        << "<rect x=\"" << fmt(ox) << "\" y=\"" << fmt(oy) << "\" width=\"" << fmt(plot_w) << "\" height=\""
        << fmt(plot_h) << "\" fill=\"none\" stroke=\"black\"/>\n";
    for (int d = static_cast<int>(std::ceil(log_lo - 1e-9)); d <= static_cast<int>(std::floor(log_hi + 1e-9)); ++d) {
      const double x = ox + (d - log_lo) / (log_hi - log_lo) * plot_w;
      out << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(oy + plot_h) << "\" x2=\"" << fmt(x) << "\" y2=\""
          << fmt(oy + plot_h + 4) << "\" stroke=\"black\"/>\n"
          << "<text x=\"" << fmt(x) << "\" y=\"" << fmt(oy + plot_h + 16) << "\" text-anchor=\"middle\">1e" << d
          << "</text>\n";
    }
    for (int t = 0; t <= 4; ++t) {
      const double f = t / 4.0;
      out << "<text x=\"" << fmt(ox - 5) << "\" y=\"" << fmt(sy(f) + 4) << "\" text-anchor=\"end\">" << fmt(f)
          << "</text>\n";
    }
    out << "<text x=\"" << fmt(ox + plot_w / 2) << "\" y=\"" << fmt(oy + plot_h + 32)
        << "\" text-anchor=\"middle\">transitions</text>\n";

    for (std::size_t K = 0; K <= k_max; ++K) {
      std::vector<const FrequencyRow*> pts;
      for (const auto& r : table) {
        if (r.method == methods[p] && r.order == K) pts.push_back(&r);
      }
      if (pts.empty()) continue;
      const char* color = kPalette[K % std::size(kPalette)];
      out << "<polygon fill=\"" << color << "\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
      for (const auto* r : pts) out << fmt(sx(r->data_size)) << ',' << fmt(sy(r->wilson_hi)) << ' ';
      for (auto it = pts.rbegin(); it != pts.rend(); ++it) {
        out << fmt(sx((*it)->data_size)) << ',' << fmt(sy((*it)->wilson_lo)) << ' ';
      }
      out << "\"/>\n<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
      for (const auto* r : pts) out << fmt(sx(r->data_size)) << ',' << fmt(sy(r->frequency)) << ' ';
      out << "\"/>\n";
    }
    out << "</g>\n";
  }
  // legend
  const double ly = height - 12;
  for (std::size_t K = 0; K <= k_max; ++K) {
    const double lx = 10 + 60 * static_cast<double>(K);
    out << "<rect x=\"" << fmt(lx) << "\" y=\"" << fmt(ly - 8) << "\" width=\"10\" height=\"10\" fill=\""
        << kPalette[K % std::size(kPalette)] << "\"/>\n"
        << "<text x=\"" << fmt(lx + 14) << "\" y=\"" << fmt(ly + 1) << "\">K=" << K << "</text>\n";
  }
  out << "</svg>\n";
}

}  // namespace pathorder
