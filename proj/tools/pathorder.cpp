#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "pathorder/constraint.hpp"
#include "pathorder/errors.hpp"
#include "pathorder/experiment.hpp"
#include "pathorder/model.hpp"
#include "pathorder/pathdata.hpp"
#include "pathorder/selection.hpp"
#include "pathorder/synth.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace pathorder;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitUsage = 2;

std::ofstream open_output(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  return out;
}

// Writes to `path`, or stdout when the path is empty or "-".
void emit(const std::string& path, const std::string& content) {
  if (path.empty() || path == "-") {
    std::cout << content;
    return;
  }
  auto out = open_output(path);
  out << content;
  if (!out) throw IoError("failed writing '" + path + "'");
}

void require_file(const std::string& path) {
  if (!fs::exists(path)) throw IoError("no such file '" + path + "'");
}

struct GraphArgs {
  std::string path;
  bool undirected = false;
  bool self_loops = false;

  void add_to(CLI::App* app) {
    app->add_option("--graph", path, "Edge list file: one 'source,target' pair per line, '#' comments")->required();
    app->add_flag("--undirected", undirected, "Insert every edge in both directions");
    app->add_flag("--allow-self-loops", self_loops, "Accept edges from a node to itself");
  }

  NetworkConstraint load() const {
    require_file(path);
    return read_edge_list(path, undirected, self_loops);
  }
};

struct PathArgs {
  std::string path;
  bool freq_column = false;

  void add_to(CLI::App* app) {
    app->add_option("--paths", path, "Path file: comma-separated node labels, one path per line")->required();
    app->add_flag("--freq-column", freq_column, "Last field of each path line is an integer multiplicity");
  }

  PathDataset load(const NetworkConstraint& g) const {
    require_file(path);
    return read_paths(path, g, freq_column);
  }
};

// ---- dof

struct DofCommand {
  GraphArgs graph;
  std::size_t max_order = 0;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("dof", "Print per-layer and cumulative degrees of freedom");
    graph.add_to(app);
    app->add_option("--max-order", max_order, "Largest layer order K")->required();
    app->callback([this] { run(); });
  }

  void run() const {
    const auto g = graph.load();
    const auto df = degrees_of_freedom(g, max_order);
    std::cout << "k,layer_df,cumulative_df\n";
    std::uint64_t total = 0;
    for (std::size_t k = 0; k <= max_order; ++k) {
      total = checked_add(total, df.per_layer[k]);
      std::cout << k << ',' << df.per_layer[k] << ',' << total << '\n';
    }
  }
};

// ---- fit

struct FitCommand {
  GraphArgs graph;
  PathArgs paths;
  std::size_t order = 0;
  bool posterior = false;
  double alpha0 = 1.0;
  std::string out;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("fit", "Fit a multi-order model of maximum order K and write it as JSON");
    graph.add_to(app);
    paths.add_to(app);
    app->add_option("--order", order, "Maximum order K of the fitted model")->required();
    app->add_flag("--posterior", posterior, "Write Dirichlet posterior hyperparameters instead of the MLE");
    app->add_option("--alpha0", alpha0, "Prior concentration for every hyperparameter")->capture_default_str();
    app->add_option("--out", out, "Output file (default: stdout)");
    app->callback([this] { run(); });
  }

  void run() const {
    if (!(alpha0 > 0.0)) throw UsageError("--alpha0 must be positive");
    const auto g = graph.load();
    const auto data = paths.load(g);
    const auto tc = count_transitions(data, g, order);
    const auto lc = layer_counts(tc, g, order);
    std::string text;
    if (posterior) {
      const auto post = posterior_update(DirichletPosterior(order, g.node_count(), alpha0), lc);
      text = posterior_to_json(post, g);
    } else {
      text = params_to_json(mle_fit(lc, g), g);
    }
    emit(out, text + "\n");
  }
};

// ---- select

struct SelectCommand {
  GraphArgs graph;
  PathArgs paths;
  std::size_t max_order = 0;
  std::string method = "all";
  double p_thres = 0.05;
  std::string evidence = "very_strong";
  bool evidence_given = false;
  double alpha0 = 1.0;
  std::string prior = "uniform";
  std::string lr_mode = "all";
  std::string report_path;
  std::string pvalues_path;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("select", "Select the maximum order with one or all methods");
    graph.add_to(app);
    paths.add_to(app);
    app->add_option("--max-order", max_order, "Largest candidate order K_max")->required();
    app->add_option("--method", method, "Method: all, aic, bic, edc, lr or bf")
        ->check(CLI::IsMember({"all", "aic", "bic", "edc", "lr", "bf"}))
        ->capture_default_str();
    app->add_option("--p-thres", p_thres, "Significance threshold of the likelihood-ratio test")
        ->capture_default_str();
    app->add_option("--bf-evidence", evidence, "Bayes-factor evidence level: positive (>3) or very_strong (>150)")
        ->check(CLI::IsMember({"positive", "very_strong"}))
        ->each([this](const std::string&) { evidence_given = true; });
    app->add_option("--alpha0", alpha0, "Prior concentration for every Dirichlet hyperparameter")
        ->capture_default_str();
    app->add_option("--prior", prior, "Prior over orders: uniform or exp-df")
        ->check(CLI::IsMember({"uniform", "exp-df"}))
        ->capture_default_str();
    app->add_option("--lr-mode", lr_mode, "LR comparisons: all smaller orders, or adjacent orders only")
        ->check(CLI::IsMember({"all", "adjacent"}))
        ->capture_default_str();
    app->add_option("--report", report_path, "Write per-order scores as CSV");
    app->add_option("--pvalues", pvalues_path, "Write the LR p-value matrix as CSV");
    app->callback([this] { run(); });
  }

  void run() const {
    if (!(p_thres > 0.0 && p_thres < 1.0)) throw UsageError("--p-thres must lie in (0, 1)");
    if (!(alpha0 > 0.0)) throw UsageError("--alpha0 must be positive");
    const auto g = graph.load();
    const auto data = paths.load(g);
    const auto tc = count_transitions(data, g, max_order);
    auto report = score_all(tc, g, max_order, alpha0);
    const auto order_prior = OrderPrior::parse(prior);
    const auto mode = parse_lr_mode(lr_mode);

    auto criterion = [&](Criterion c, const char* name, bool available) {
      if (available) {
        report.chosen.emplace_back(name, select_ic(report, c));
      } else {
        std::cerr << "warning: " << name << " undefined for n_total = " << report.n_total << "; reporting order 0\n";
        report.chosen.emplace_back(name, 0);
      }
    };
    auto bayes = [&](EvidenceLevel level) {
      const EvidenceThreshold threshold{level};
      report.chosen.emplace_back("bf(" + threshold.name() + ")", select_bf(report, order_prior, threshold));
    };

    if (method == "all" || method == "aic") criterion(Criterion::aic, "aic", true);
    if (method == "all" || method == "bic") criterion(Criterion::bic, "bic", report.bic_available);
    if (method == "all" || method == "edc") criterion(Criterion::edc, "edc", report.edc_available);
    if (method == "all" || method == "lr") report.chosen.emplace_back("lr", select_lr(report, p_thres, mode));
    if (method == "bf") {
      bayes(EvidenceThreshold::parse(evidence).level);
    } else if (method == "all") {
      if (evidence_given) {
        bayes(EvidenceThreshold::parse(evidence).level);
      } else {
        bayes(EvidenceLevel::positive);
        bayes(EvidenceLevel::very_strong);
      }
    }

    if (!report_path.empty()) {
      std::ostringstream s;
      write_report_csv(s, report);
      emit(report_path, s.str());
    }
    if (!pvalues_path.empty()) {
      std::ostringstream s;
      write_pvalues_csv(s, report);
      emit(pvalues_path, s.str());
    }
    write_chosen(std::cout, report);
  }
};

// ---- synth-graph

struct SynthGraphCommand {
  std::size_t n = 0;
  std::size_t m = 0;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::string meta;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("synth-graph", "Generate a pruned random G(n, m) graph as a directed edge list");
    app->add_option("--n", n, "Number of nodes before pruning")->required();
    app->add_option("--m", m, "Number of undirected edges")->required();
    app->add_option("--seed", seed, "Random seed (required)");
    app->add_option("--out", out, "Edge list output file (default: stdout)");
    app->add_option("--meta", meta, "Write a JSON metadata sidecar");
    app->callback([this] { run(); });
  }

  void run() const {
    if (!seed) throw UsageError("--seed is required");
    const auto g = random_gnm(n, m, *seed);
    std::ostringstream s;
    write_edge_list(s, g);
    emit(out, s.str());
    if (!meta.empty()) {
      json j;
      j["tool_version"] = PATHORDER_VERSION;
      j["n"] = n;
      j["m"] = m;
      j["seed"] = *seed;
      j["nodes_after_prune"] = g.node_count();
      j["directed_edges"] = g.edge_count();
      emit(meta, j.dump(2) + "\n");
    }
  }
};

// ---- synth-paths

struct SynthPathsCommand {
  GraphArgs graph;
  std::size_t order = 0;
  std::uint64_t n_total = 0;
  std::optional<std::uint64_t> seed;
  std::string length_law;
  std::string out;
  std::string meta;
  std::string model_out;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand(
        "synth-paths", "Sample a random ground-truth model of order K on a graph and generate paths from it");
    graph.add_to(app);
    app->add_option("--order", order, "Ground-truth maximum order K_gt")->required();
    app->add_option("--n-total", n_total, "Target number of transitions")->required();
    app->add_option("--seed", seed, "Random seed (required)");
    app->add_option("--length-law", length_law, "Path length law in nodes: constant:L or uniform:a:b (default constant:K+3)");
    app->add_option("--out", out, "Path file output (default: stdout)");
    app->add_option("--meta", meta, "Write a JSON metadata sidecar");
    app->add_option("--model-out", model_out, "Write the ground-truth model as JSON");
    app->callback([this] { run(); });
  }

  void run() const {
    if (!seed) throw UsageError("--seed is required");
    if (n_total < 1) throw UsageError("--n-total must be at least 1");
    const auto law = length_law.empty() ? PathLengthLaw::default_for(order) : PathLengthLaw::parse(length_law);
    const auto g = prune_dead_ends(graph.load());
    if (g.empty()) throw DomainError("graph is empty after pruning dead ends");
    const std::uint64_t model_seed = derive_seed(*seed, 1);
    const std::uint64_t path_seed = derive_seed(*seed, 2);
    const auto gt = sample_ground_truth(g, order, model_seed);
    const auto data = generate_paths(gt, n_total, law, path_seed);
    std::ostringstream s;
    write_paths(s, data, g, false);
    emit(out, s.str());
    if (!model_out.empty()) emit(model_out, params_to_json(gt.params, g) + "\n");
    if (!meta.empty()) {
      json j;
      j["tool_version"] = PATHORDER_VERSION;
      j["seed"] = *seed;
      j["model_seed"] = model_seed;
      j["path_seed"] = path_seed;
      j["k_gt"] = order;
      j["length_law"] = law.to_string();
      j["n_total_target"] = n_total;
      j["n_total"] = data.n_total();
      j["paths"] = data.paths().size();
      emit(meta, j.dump(2) + "\n");
    }
  }
};

// ---- experiment

std::vector<FrequencyRow> write_outputs(const fs::path& dir, const std::vector<ResultRecord>& records,
                                        std::size_t k_max, double z) {
  const auto table = aggregate(records, k_max, z);
  {
    auto out = open_output((dir / "results.csv").string());
    write_results_csv(out, records);
  }
  {
    auto out = open_output((dir / "frequencies.csv").string());
    write_frequency_csv(out, table);
  }
  {
    auto out = open_output((dir / "figure.svg").string());
    write_svg(out, table);
  }
  return table;
}

struct ExperimentCommand {
  std::string config_path;
  std::string out_dir;
  std::size_t workers = 1;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> replications;
  bool quiet = false;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("experiment", "Run a synthetic order-recovery experiment from a TOML config");
    app->add_option("--config", config_path, "Experiment config file (flat TOML)")->required();
    app->add_option("--out-dir", out_dir, "Directory receiving results, frequencies, ranges, figure and metadata")
        ->required();
    app->add_option("--workers", workers, "Number of worker threads")->capture_default_str();
    app->add_option("--seed", seed, "Master seed; overrides master_seed in the config");
    app->add_option("--replications", replications, "Overrides replications in the config");
    app->add_flag("--quiet", quiet, "Suppress progress output on stderr");
    app->callback([this] { run(); });
  }

  void run() const {
    require_file(config_path);
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open '" + config_path + "'");
    const auto values = parse_toml(in);
    if (!seed && !values.count("master_seed")) {
      throw UsageError("a master seed is required: set master_seed in the config or pass --seed");
    }
    ExperimentConfig config;
    apply_config_values(config, values);
    if (seed) config.master_seed = *seed;
    if (replications) config.replications = *replications;
    if (workers < 1) throw UsageError("--workers must be at least 1");
    config.validate();

    const fs::path dir(out_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw IoError("cannot create '" + out_dir + "': " + ec.message());

    auto progress = [this](std::size_t done, std::size_t total) {
      if (!quiet) std::cerr << "\rreplications " << done << '/' << total << (done == total ? "\n" : "") << std::flush;
    };
    const auto records = pathorder::run(config, workers, progress);
    write_outputs(dir, records, config.k_max, config.z);
    {
      auto out = open_output((dir / "ranges.csv").string());
      write_ranges_csv(out, detection_ranges(records, config));
    }

    std::size_t failures = 0;
    for (const auto& r : records) failures += r.failed() ? 1 : 0;
    const auto canonical = config_to_toml(config);
    json j;
    j["tool_version"] = PATHORDER_VERSION;
    j["config_hash"] = fnv1a_hex(canonical);
    j["config"] = canonical;
    j["master_seed"] = config.master_seed;
    j["length_law"] = config.effective_length_law().to_string();
    j["data_sizes"] = config.data_sizes;
    j["replications"] = config.replications;
    json seeds = json::array();
    for (std::size_t i = 0; i < config.data_sizes.size(); ++i) {
      for (std::size_t r = 0; r < config.replications; ++r) seeds.push_back(replication_seed(config.master_seed, i, r));
    }
    j["replication_seeds"] = seeds;
    j["records"] = records.size();
    j["failed_records"] = failures;
    auto out = open_output((dir / "metadata.json").string());
    out << j.dump(2) << '\n';
  }
};

// ---- plot

struct PlotCommand {
  std::string results;
  std::string out;
  std::string frequencies;
  std::optional<std::size_t> max_order;
  double z = 1.959964;

  void attach(CLI::App& root) {
    auto* app = root.add_subcommand("plot", "Render selection frequencies from an existing results.csv as SVG");
    app->add_option("--results", results, "results.csv written by the experiment subcommand")->required();
    app->add_option("--out", out, "SVG output file (default: stdout)");
    app->add_option("--frequencies", frequencies, "Also write the aggregated frequency table as CSV");
    app->add_option("--max-order", max_order, "Largest order shown (default: largest selected order)");
    app->add_option("--z", z, "Normal quantile of the Wilson interval")->capture_default_str();
    app->callback([this] { run(); });
  }

  void run() const {
    require_file(results);
    std::ifstream in(results);
    if (!in) throw IoError("cannot open '" + results + "'");
    const auto records = read_results_csv(in);
    std::size_t k_max = 0;
    for (const auto& r : records) {
      if (!r.failed()) k_max = std::max(k_max, *r.selected_k);
    }
    if (max_order) {
      if (*max_order < k_max) throw UsageError("--max-order is smaller than a selected order in the results");
      k_max = *max_order;
    }
    const auto table = aggregate(records, k_max, z);
    if (!frequencies.empty()) {
      std::ostringstream s;
      write_frequency_csv(s, table);
      emit(frequencies, s.str());
    }
    std::ostringstream s;
    write_svg(s, table);
    emit(out, s.str());
  }
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Order selection for multi-order models of paths constrained to a network"};
  app.set_version_flag("--version", PATHORDER_VERSION);
  app.require_subcommand(1, 1);

  DofCommand dof;
  FitCommand fit;
  SelectCommand select;
  SynthGraphCommand synth_graph;
  SynthPathsCommand synth_paths;
  ExperimentCommand experiment;
  PlotCommand plot;
  dof.attach(app);
  fit.attach(app);
  select.attach(app);
  synth_graph.attach(app);
  synth_paths.attach(app);
  experiment.attach(app);
  plot.attach(app);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
