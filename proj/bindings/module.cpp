#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <sstream>

#include "pathorder/constraint.hpp"
#include "pathorder/errors.hpp"
#include "pathorder/experiment.hpp"
#include "pathorder/model.hpp"
#include "pathorder/numerics.hpp"
#include "pathorder/pathdata.hpp"
#include "pathorder/selection.hpp"
#include "pathorder/synth.hpp"

namespace py = pybind11;
using namespace pathorder;

namespace {

std::vector<std::string> labels_of(const NetworkConstraint& g, std::span<const NodeIndex> nodes) {
  std::vector<std::string> out;
  out.reserve(nodes.size());
  for (auto v : nodes) out.push_back(g.label(v));
  return out;
}

History indices_of(const NetworkConstraint& g, const std::vector<std::string>& labels) {
  History h;
  h.reserve(labels.size());
  for (const auto& l : labels) h.push_back(g.index_of(l));
  return h;
}

template <typename Writer, typename T>
std::string to_text(Writer write, const T& value) {
  std::ostringstream out;
  write(out, value);
  return out.str();
}

Criterion parse_criterion(const std::string& name) {
  if (name == "aic") return Criterion::aic;
  if (name == "bic") return Criterion::bic;
  if (name == "edc") return Criterion::edc;
  throw UsageError("unknown information criterion '" + name + "' (aic, bic, edc)");
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Order selection for multi-order Markov models of paths on networks";
  m.attr("__version__") = PATHORDER_VERSION;

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ConstraintViolation>(m, "ConstraintViolation", base.ptr());
  py::register_exception<CapacityError>(m, "CapacityError", base.ptr());
  py::register_exception<UsageError>(m, "UsageError", base.ptr());
  py::register_exception<NumericError>(m, "NumericError", base.ptr());
  py::register_exception<DegenerateTestError>(m, "DegenerateTestError", base.ptr());
  py::register_exception<IoError>(m, "IoError", base.ptr());

  // numerics
  m.def("log_gamma", &numerics::log_gamma, py::arg("x"));
  m.def("regularized_upper_gamma", &numerics::regularized_upper_gamma, py::arg("a"), py::arg("x"));
  m.def("regularized_lower_gamma", &numerics::regularized_lower_gamma, py::arg("a"), py::arg("x"));
  m.def("chi_square_survival", &numerics::chi_square_survival, py::arg("x"), py::arg("dof"));
  m.def("wilson_interval", &wilson_interval, py::arg("successes"), py::arg("trials"), py::arg("z") = 1.959964);

  // constraint
  py::class_<NetworkConstraint>(m, "NetworkConstraint")
      .def_static(
          "from_edges",
          [](const std::vector<LabelEdge>& edges, bool undirected, bool allow_self_loops) {
            return NetworkConstraint::build(edges, undirected, allow_self_loops);
          },
          py::arg("edges"), py::arg("undirected") = false, py::arg("allow_self_loops") = false)
      .def_static("read", &read_edge_list, py::arg("path"), py::arg("undirected") = false,
                  py::arg("allow_self_loops") = false)
      .def_static("complete", &complete_digraph, py::arg("labels"), py::arg("self_loops") = true)
      .def_property_readonly("node_count", &NetworkConstraint::node_count)
      .def_property_readonly("edge_count", &NetworkConstraint::edge_count)
      .def_property_readonly("labels",
                             [](const NetworkConstraint& g) {
                               return std::vector<std::string>(g.labels().begin(), g.labels().end());
                             })
      .def("successors",
           [](const NetworkConstraint& g, const std::vector<std::string>& history) {
             return labels_of(g, successors_of(g, indices_of(g, history)));
           },
           py::arg("history"))
      .def("edges",
           [](const NetworkConstraint& g) {
             std::vector<LabelEdge> out;
             for (auto [s, t] : g.edges()) out.emplace_back(g.label(s), g.label(t));
             return out;
           })
      .def("to_csv", [](const NetworkConstraint& g) { return to_text(write_edge_list, g); })
      .def("__len__", &NetworkConstraint::node_count)
      .def("__repr__", [](const NetworkConstraint& g) {
        return "<NetworkConstraint nodes=" + std::to_string(g.node_count()) +
               " edges=" + std::to_string(g.edge_count()) + ">";
      });

  m.def("degrees_of_freedom", [](const NetworkConstraint& g, std::size_t K) { return degrees_of_freedom(g, K).per_layer; },
        py::arg("graph"), py::arg("max_order"), "Per-layer degrees of freedom for layers 0..max_order");
  m.def("count_histories", &count_histories, py::arg("graph"), py::arg("k"));

  // path data
  py::class_<PathDataset>(m, "PathDataset")
      .def_static("read", &read_paths, py::arg("path"), py::arg("graph"), py::arg("freq_column") = false)
      .def_static(
          "from_paths",
          [](const NetworkConstraint& g, const std::vector<std::vector<std::string>>& paths,
             std::optional<std::vector<std::uint64_t>> frequencies) {
            if (frequencies && frequencies->size() != paths.size()) {
              throw UsageError("frequencies must have one entry per path");
            }
            PathDataset data;
            for (std::size_t i = 0; i < paths.size(); ++i) {
              data.add(Path{indices_of(g, paths[i]), frequencies ? (*frequencies)[i] : 1});
            }
            validate(data, g);
            return data;
          },
          py::arg("graph"), py::arg("paths"), py::arg("frequencies") = py::none())
      .def_property_readonly("n_total", &PathDataset::n_total)
      .def_property_readonly("l_max", &PathDataset::l_max)
      .def("__len__", [](const PathDataset& d) { return d.paths().size(); })
      .def("to_list",
           [](const PathDataset& d, const NetworkConstraint& g) {
             std::vector<std::pair<std::vector<std::string>, std::uint64_t>> out;
             for (const auto& p : d.paths()) out.emplace_back(labels_of(g, p.nodes), p.frequency);
             return out;
           },
           py::arg("graph"));

  py::class_<TransitionCounts>(m, "TransitionCounts")
      .def_property_readonly("max_order", &TransitionCounts::max_order)
      .def_property_readonly("n_total", &TransitionCounts::n_total)
      .def("serialize", &serialize, py::arg("graph"));

  m.def("count_transitions", &count_transitions, py::arg("data"), py::arg("graph"), py::arg("max_order"));

  // model
  m.def(
      "fit",
      [](const TransitionCounts& tc, const NetworkConstraint& g, std::size_t K) {
        return params_to_json(mle_fit(layer_counts(tc, g, K), g), g);
      },
      py::arg("counts"), py::arg("graph"), py::arg("order"), "Maximum-likelihood parameters as a JSON document");
  m.def(
      "posterior",
      [](const TransitionCounts& tc, const NetworkConstraint& g, std::size_t K, double alpha0) {
        return posterior_to_json(posterior_update(DirichletPosterior(K, g.node_count(), alpha0), layer_counts(tc, g, K)),
                                 g);
      },
      py::arg("counts"), py::arg("graph"), py::arg("order"), py::arg("alpha0") = 1.0,
      "Dirichlet posterior hyperparameters as a JSON document");
  m.def(
      "log_likelihood",
      [](const TransitionCounts& tc, const NetworkConstraint& g, std::size_t K) {
        const auto lc = layer_counts(tc, g, K);
        return log_likelihood(mle_fit(lc, g), lc);
      },
      py::arg("counts"), py::arg("graph"), py::arg("order"));
  m.def(
      "log_marginal_likelihood",
      [](const TransitionCounts& tc, const NetworkConstraint& g, std::size_t K, double alpha0) {
        return log_marginal_likelihood(DirichletPosterior(K, g.node_count(), alpha0), layer_counts(tc, g, K));
      },
      py::arg("counts"), py::arg("graph"), py::arg("order"), py::arg("alpha0") = 1.0);

  // selection
  py::class_<OrderScore>(m, "OrderScore")
      .def_readonly("order", &OrderScore::order)
      .def_readonly("df", &OrderScore::df)
      .def_readonly("log_likelihood", &OrderScore::log_likelihood)
      .def_readonly("log_marginal", &OrderScore::log_marginal)
      .def_readonly("aic", &OrderScore::aic)
      .def_readonly("bic", &OrderScore::bic)
      .def_readonly("edc", &OrderScore::edc);

  py::class_<PairTest>(m, "PairTest")
      .def_readonly("order", &PairTest::order)
      .def_readonly("order_prime", &PairTest::order_prime)
      .def_readonly("statistic", &PairTest::statistic)
      .def_readonly("xi", &PairTest::xi)
      .def_readonly("p_value", &PairTest::p_value);

  py::class_<SelectionReport>(m, "SelectionReport")
      .def_readonly("scores", &SelectionReport::scores)
      .def_readonly("pvalues", &SelectionReport::pvalues)
      .def_readonly("n_total", &SelectionReport::n_total)
      .def_readonly("node_count", &SelectionReport::node_count)
      .def_readonly("bic_available", &SelectionReport::bic_available)
      .def_readonly("edc_available", &SelectionReport::edc_available)
      .def_property_readonly("max_order", &SelectionReport::max_order)
      .def("to_csv", [](const SelectionReport& r) { return to_text(write_report_csv, r); })
      .def("pvalues_csv", [](const SelectionReport& r) { return to_text(write_pvalues_csv, r); });

  m.def("score_all", &score_all, py::arg("counts"), py::arg("graph"), py::arg("max_order"), py::arg("alpha0") = 1.0);
  m.def(
      "select_ic", [](const SelectionReport& r, const std::string& name) { return select_ic(r, parse_criterion(name)); },
      py::arg("report"), py::arg("criterion"));
  m.def(
      "select_lr",
      [](const SelectionReport& r, double p, const std::string& mode) { return select_lr(r, p, parse_lr_mode(mode)); },
      py::arg("report"), py::arg("p_thres") = 0.05, py::arg("mode") = "all");
  m.def(
      "select_bf",
      [](const SelectionReport& r, const std::string& prior, const std::string& evidence) {
        return select_bf(r, OrderPrior::parse(prior), EvidenceThreshold::parse(evidence));
      },
      py::arg("report"), py::arg("prior") = "uniform", py::arg("evidence") = "very_strong");
  m.def(
      "select",
      [](const SelectionReport& r, const std::string& method, const std::string& lr_mode) {
        return MethodSpec::parse(method).apply(r, parse_lr_mode(lr_mode));
      },
      py::arg("report"), py::arg("method"), py::arg("lr_mode") = "all",
      "Apply a method given as 'aic', 'bic', 'edc', 'lr:<p>' or 'bf:<level>[:<prior>]'");
  m.def("lr_test", &lr_test, py::arg("report"), py::arg("order"), py::arg("order_prime"));

  // synthetic data
  m.def("random_gnm", &random_gnm, py::arg("n"), py::arg("m"), py::arg("seed"));
  m.def("prune_dead_ends", &prune_dead_ends, py::arg("graph"));

  py::class_<GroundTruth>(m, "GroundTruth")
      .def_readonly("graph", &GroundTruth::graph)
      .def_readonly("order", &GroundTruth::order)
      .def_readonly("seed", &GroundTruth::seed)
      .def("to_json", [](const GroundTruth& gt) { return params_to_json(gt.params, gt.graph); });

  m.def("sample_ground_truth", &sample_ground_truth, py::arg("graph"), py::arg("order"), py::arg("seed"));
  m.def(
      "generate_paths",
      [](const GroundTruth& gt, std::uint64_t n_total, const std::string& law, std::uint64_t seed) {
        const auto l = law.empty() ? PathLengthLaw::default_for(gt.order) : PathLengthLaw::parse(law);
        return generate_paths(gt, n_total, l, seed);
      },
      py::arg("ground_truth"), py::arg("n_total"), py::arg("length_law") = "", py::arg("seed"),
      "Random walks from the ground truth; length_law is 'constant:<L>' or 'uniform:<lo>:<hi>'");

  // experiments
  py::class_<ExperimentConfig>(m, "ExperimentConfig")
      .def_static(
          "from_toml",
          [](const std::string& text) {
            std::istringstream in(text);
            return parse_config(in);
          },
          py::arg("text"))
      .def_static("read", &read_config, py::arg("path"))
      .def("to_toml", &config_to_toml)
      .def("validate", &ExperimentConfig::validate)
      .def_readwrite("n", &ExperimentConfig::n)
      .def_readwrite("m", &ExperimentConfig::m)
      .def_readwrite("k_gt", &ExperimentConfig::k_gt)
      .def_readwrite("k_max", &ExperimentConfig::k_max)
      .def_readwrite("data_sizes", &ExperimentConfig::data_sizes)
      .def_readwrite("replications", &ExperimentConfig::replications)
      .def_readwrite("master_seed", &ExperimentConfig::master_seed)
      .def_readwrite("alpha0", &ExperimentConfig::alpha0)
      .def_readwrite("z", &ExperimentConfig::z)
      .def_property_readonly("methods", [](const ExperimentConfig& c) {
        std::vector<std::string> out;
        for (const auto& s : c.methods) out.push_back(s.name());
        return out;
      });

  py::class_<ResultRecord>(m, "ResultRecord")
      .def_readonly("method", &ResultRecord::method)
      .def_readonly("data_size", &ResultRecord::data_size)
      .def_readonly("replication", &ResultRecord::replication)
      .def_readonly("seed", &ResultRecord::seed)
      .def_readonly("n_total", &ResultRecord::n_total)
      .def_readonly("selected_k", &ResultRecord::selected_k)
      .def_readonly("error", &ResultRecord::error)
      .def_property_readonly("failed", &ResultRecord::failed);

  py::class_<FrequencyRow>(m, "FrequencyRow")
      .def_readonly("method", &FrequencyRow::method)
      .def_readonly("data_size", &FrequencyRow::data_size)
      .def_readonly("order", &FrequencyRow::order)
      .def_readonly("count", &FrequencyRow::count)
      .def_readonly("total", &FrequencyRow::total)
      .def_readonly("frequency", &FrequencyRow::frequency)
      .def_readonly("wilson_lo", &FrequencyRow::wilson_lo)
      .def_readonly("wilson_hi", &FrequencyRow::wilson_hi);

  py::class_<DetectionRange>(m, "DetectionRange")
      .def_readonly("method", &DetectionRange::method)
      .def_readonly("min_size", &DetectionRange::min_size)
      .def_readonly("max_size", &DetectionRange::max_size);

  m.def("replication_seed", &replication_seed, py::arg("master_seed"), py::arg("size_index"), py::arg("replication"));
  m.def(
      "run_experiment",
      [](const ExperimentConfig& c, std::size_t workers) {
        py::gil_scoped_release release;
        return run(c, workers);
      },
      py::arg("config"), py::arg("workers") = 1);
  m.def("aggregate", &aggregate, py::arg("records"), py::arg("max_order"), py::arg("z") = 1.959964);
  m.def("detection_ranges", &detection_ranges, py::arg("records"), py::arg("config"));
  m.def(
      "results_csv", [](const std::vector<ResultRecord>& r) { return to_text(write_results_csv, r); },
      py::arg("records"));
  m.def(
      "read_results_csv",
      [](const std::string& text) {
        std::istringstream in(text);
        return read_results_csv(in);
      },
      py::arg("text"));
  m.def(
      "frequencies_csv", [](const std::vector<FrequencyRow>& t) { return to_text(write_frequency_csv, t); },
      py::arg("table"));
  m.def(
      "ranges_csv", [](const std::vector<DetectionRange>& r) { return to_text(write_ranges_csv, r); },
      py::arg("ranges"));
  m.def(
      "svg", [](const std::vector<FrequencyRow>& t) { return to_text(write_svg, t); }, py::arg("table"));
}
