#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "sqp/baselines.hpp"
#include "sqp/experiment.hpp"
#include "sqp/folds.hpp"
#include "sqp/io.hpp"
#include "sqp/matcher.hpp"
#include "sqp/metrics.hpp"
#include "sqp/parallel.hpp"
#include "sqp/risk.hpp"
#include "sqp/stats.hpp"
#include "sqp/synth.hpp"
#include "sqp/types.hpp"

namespace py = pybind11;
using namespace sqp;

PYBIND11_MODULE(sqp_core, m) {
    m.doc() = "risk-sensitive configuration selection and per-query routing";

    py::register_exception<io_error>(m, "IoError", PyExc_ValueError);
    py::register_exception<contract_error>(m, "ContractError", PyExc_ValueError);

    // ---- core data ------------------------------------------------------
    py::class_<RunEntry>(m, "RunEntry")
        .def(py::init<>())
        .def(py::init([](std::string doc_id, int rank, double score) {
                 return RunEntry{std::move(doc_id), rank, score};
             }),
             py::arg("doc_id"), py::arg("rank"), py::arg("score"))
        .def_readwrite("doc_id", &RunEntry::doc_id)
        .def_readwrite("rank", &RunEntry::rank)
        .def_readwrite("score", &RunEntry::score);

    py::class_<RunList>(m, "RunList")
        .def(py::init<>())
        .def(py::init([](QueryId query_id, std::vector<RunEntry> entries, std::string tag) {
                 return RunList{std::move(query_id), std::move(entries), std::move(tag)};
             }),
             py::arg("query_id"), py::arg("entries"), py::arg("tag") = "run")
        .def_readwrite("query_id", &RunList::query_id)
        .def_readwrite("entries", &RunList::entries)
        .def_readwrite("tag", &RunList::tag);

    py::class_<Qrels>(m, "Qrels")
        .def(py::init<>())
        .def("add", &Qrels::add, py::arg("query_id"), py::arg("doc_id"), py::arg("grade"))
        .def("grade", &Qrels::grade)
        .def("is_relevant", &Qrels::is_relevant)
        .def("is_judged", &Qrels::is_judged)
        .def("relevant_count", &Qrels::relevant_count)
        .def("queries", &Qrels::queries)
        .def("__len__", &Qrels::size);

    py::class_<FeatureRecord>(m, "FeatureRecord")
        .def(py::init([](QueryId query_id, std::string doc_id, std::string feature_name,
                         double value) {
                 return FeatureRecord{std::move(query_id), std::move(doc_id),
                                      std::move(feature_name), value};
             }),
             py::arg("query_id"), py::arg("doc_id"), py::arg("feature_name"), py::arg("value"))
        .def_readwrite("query_id", &FeatureRecord::query_id)
        .def_readwrite("doc_id", &FeatureRecord::doc_id)
        .def_readwrite("feature_name", &FeatureRecord::feature_name)
        .def_readwrite("value", &FeatureRecord::value);

    py::class_<QueryFeatureVector>(m, "QueryFeatureVector")
        .def(py::init<>())
        .def(py::init([](QueryId query_id, std::vector<std::string> names,
                         std::vector<double> values) {
                 return QueryFeatureVector{std::move(query_id), std::move(names),
                                           std::move(values)};
             }),
             py::arg("query_id"), py::arg("names"), py::arg("values"))
        .def_readwrite("query_id", &QueryFeatureVector::query_id)
        .def_readwrite("names", &QueryFeatureVector::names)
        .def_readwrite("values", &QueryFeatureVector::values);

    py::class_<ConfigurationDescriptor>(m, "ConfigurationDescriptor")
        .def(py::init<>())
        .def_readwrite("config_id", &ConfigurationDescriptor::config_id)
        .def_readwrite("retrieval_model", &ConfigurationDescriptor::retrieval_model)
        .def_readwrite("qe_model", &ConfigurationDescriptor::qe_model)
        .def_readwrite("qe_docs", &ConfigurationDescriptor::qe_docs)
        .def_readwrite("qe_terms", &ConfigurationDescriptor::qe_terms)
        .def_readwrite("qe_min_docs", &ConfigurationDescriptor::qe_min_docs)
        .def("uses_expansion", &ConfigurationDescriptor::uses_expansion)
        .def("validate", &ConfigurationDescriptor::validate);

    py::class_<EffectivenessMatrix>(m, "EffectivenessMatrix")
        .def(py::init<std::string>(), py::arg("metric_name") = "unknown")
        .def("add_cell", &EffectivenessMatrix::add_cell)
        .def("finalize", &EffectivenessMatrix::finalize)
        .def("score", &EffectivenessMatrix::score)
        .def("score_at", &EffectivenessMatrix::score_at)
        .def("configs", &EffectivenessMatrix::configs)
        .def("queries", &EffectivenessMatrix::queries)
        .def("metric_name", &EffectivenessMatrix::metric_name)
        .def("set_access_observer", &EffectivenessMatrix::set_access_observer);

    // ---- io ---------------------------------------------------------------
    m.def("load_matrix", &load_matrix);
    m.def("save_matrix", &save_matrix);
    m.def("load_runs", &load_runs);
    m.def("save_runs", &save_runs);
    m.def("load_qrels", &load_qrels);
    m.def("save_qrels", &save_qrels);
    m.def("load_features", &load_features);
    m.def("save_features", &save_features);
    m.def("load_descriptors", &load_descriptors);
    m.def("save_descriptors", &save_descriptors);

    // ---- metrics -----------------------------------------------------------
    py::class_<MetricSpec>(m, "MetricSpec")
        .def_static("parse", &MetricSpec::parse)
        .def("__str__", &MetricSpec::to_string);
    py::class_<RbpScore>(m, "RbpScore")
        .def_readonly("base", &RbpScore::base)
        .def_readonly("residual", &RbpScore::residual);
    m.def("precision_at_k", &precision_at_k);
    m.def("average_precision", &average_precision);
    m.def("ndcg_at_k", &ndcg_at_k);
    m.def("reciprocal_rank", &reciprocal_rank);
    m.def("rbp", &rbp, py::arg("run"), py::arg("qrels"), py::arg("persistence"),
          py::arg("depth"));
    m.def("evaluate_metric", &evaluate_metric);
    m.def(
        "build_matrix",
        [](const std::map<ConfigurationId, std::vector<RunList>>& runs, const Qrels& qrels,
           const std::string& spec) {
            std::vector<RbpResidualEntry> residuals;
            EffectivenessMatrix matrix =
                build_matrix(runs, qrels, MetricSpec::parse(spec), &residuals);
            std::vector<std::tuple<std::string, std::string, double, double>> out;
            for (const auto& r : residuals) {
                out.emplace_back(r.config_id, r.query_id, r.base, r.residual);
            }
            return py::make_tuple(std::move(matrix), std::move(out));
        },
        py::arg("runs_by_config"), py::arg("qrels"), py::arg("metric"));

    // ---- risk selection ------------------------------------------------------
    py::enum_<Objective>(m, "Objective")
        .value("E", Objective::effectiveness)
        .value("N", Objective::query_count);
    py::class_<RiskParams>(m, "RiskParams")
        .def(py::init([](Objective objective, double beta, int k, ConfigurationId baseline) {
                 RiskParams p;
                 p.objective = objective;
                 p.beta = beta;
                 p.k = k;
                 p.baseline_id = std::move(baseline);
                 return p;
             }),
             py::arg("objective") = Objective::effectiveness, py::arg("beta") = 0.0,
             py::arg("k") = 1, py::arg("baseline_id") = "")
        .def_readwrite("objective", &RiskParams::objective)
        .def_readwrite("beta", &RiskParams::beta)
        .def_readwrite("k", &RiskParams::k)
        .def_readwrite("baseline_id", &RiskParams::baseline_id);
    py::class_<GainBreakdown>(m, "GainBreakdown")
        .def_readonly("config_id", &GainBreakdown::config_id)
        .def_readonly("risk", &GainBreakdown::risk)
        .def_readonly("reward", &GainBreakdown::reward)
        .def_readonly("gain", &GainBreakdown::gain);
    py::class_<SelectionStep>(m, "SelectionStep")
        .def_readonly("config_id", &SelectionStep::config_id)
        .def_readonly("risk", &SelectionStep::risk)
        .def_readonly("reward", &SelectionStep::reward)
        .def_readonly("gain", &SelectionStep::gain)
        .def_readonly("envelope_mean_after", &SelectionStep::envelope_mean_after);
    py::class_<SelectedPool>(m, "SelectedPool")
        .def(py::init<>())
        .def_readwrite("objective", &SelectedPool::objective)
        .def_readwrite("beta", &SelectedPool::beta)
        .def_readwrite("baseline_id", &SelectedPool::baseline_id)
        .def_readwrite("metric_name", &SelectedPool::metric_name)
        .def_readwrite("steps", &SelectedPool::steps)
        .def("config_ids", &SelectedPool::config_ids)
        .def("to_json", &SelectedPool::to_json_string)
        .def_static("from_json", &SelectedPool::from_json_string);
    m.def("envelope", &envelope);
    m.def("e_risk", &e_risk);
    m.def("e_reward", &e_reward);
    m.def("n_risk", &n_risk);
    m.def("n_reward", &n_reward);
    m.def("gain", &gain);
    m.def("get_best_rsc", &get_best_rsc);
    m.def("select_configurations", &select_configurations, py::arg("queries"), py::arg("pool"),
          py::arg("matrix"), py::arg("params"));

    // ---- matcher -------------------------------------------------------------
    m.def(
        "aggregate_features",
        [](const std::vector<FeatureRecord>& records, int depth) {
            return aggregate_features(records, depth);
        },
        py::arg("records"), py::arg("depth") = 10);
    m.def("aggregate_all", [](const std::vector<FeatureRecord>& records, int depth) {
        return aggregate_all(records, depth);
    }, py::arg("records"), py::arg("depth") = 10);
    m.def("cosine", &cosine);
    py::class_<QueryConfigIndex>(m, "QueryConfigIndex")
        .def_readonly("entries", &QueryConfigIndex::entries)
        .def_readonly("pool_tag", &QueryConfigIndex::pool_tag)
        .def_readonly("metric_name", &QueryConfigIndex::metric_name)
        .def("at", &QueryConfigIndex::at);
    m.def("build_best_config_index", &build_best_config_index);
    py::class_<MatchResult>(m, "MatchResult")
        .def_readonly("config_id", &MatchResult::config_id)
        .def_readonly("matched_query", &MatchResult::matched_query)
        .def_readonly("similarity", &MatchResult::similarity);
    py::class_<TrainedModel>(m, "TrainedModel")
        .def_readonly("schema", &TrainedModel::schema)
        .def_readonly("training_vectors", &TrainedModel::training_vectors)
        .def_readonly("index", &TrainedModel::index)
        .def_readonly("pool", &TrainedModel::pool)
        .def_readonly("feature_source", &TrainedModel::feature_source)
        .def_readonly("aggregation_depth", &TrainedModel::aggregation_depth)
        .def_readonly("zscore", &TrainedModel::zscore)
        .def("transform", &TrainedModel::transform)
        .def("to_json", &TrainedModel::to_json_string)
        .def_static("from_json", &TrainedModel::from_json_string);
    m.def("train_model", &train_model, py::arg("train_queries"), py::arg("pool"),
          py::arg("matrix"), py::arg("features"), py::arg("zscore") = false,
          py::arg("feature_source") = "", py::arg("aggregation_depth") = 10);
    m.def("best_match_configuration", &best_match_configuration);

    // ---- baselines -------------------------------------------------------------
    m.def("best_trained", &best_trained);
    m.def("random_k", &random_k);
    py::class_<OracleResult>(m, "OracleResult")
        .def_readonly("per_query", &OracleResult::per_query)
        .def_readonly("mean", &OracleResult::mean);
    m.def("oracle", &oracle);
    py::enum_<FusionNorm>(m, "FusionNorm")
        .value("minmax", FusionNorm::minmax)
        .value("none", FusionNorm::none);
    py::class_<FusedEntry>(m, "FusedEntry")
        .def_readonly("doc_id", &FusedEntry::doc_id)
        .def_readonly("score", &FusedEntry::score);
    py::class_<FusedRun>(m, "FusedRun")
        .def_readonly("query_id", &FusedRun::query_id)
        .def_readonly("entries", &FusedRun::entries)
        .def_readonly("source_tags", &FusedRun::source_tags)
        .def_readonly("normalization", &FusedRun::normalization);
    m.def("comb_sum", &comb_sum);
    m.def("to_run_list", &to_run_list, py::arg("fused"), py::arg("tag") = "combsum");
    m.def("trained_sqe", &trained_sqe);

    // ---- stats / folds ------------------------------------------------------------
    py::class_<TTestResult>(m, "TTestResult")
        .def_readonly("t", &TTestResult::t)
        .def_readonly("p", &TTestResult::p);
    m.def("paired_t_test", [](const std::vector<double>& a, const std::vector<double>& b) {
        return paired_t_test(a, b);
    });
    m.def("bonferroni", &bonferroni);
    m.def("student_t_two_tailed_p", &student_t_two_tailed_p);
    m.def("regularized_incomplete_beta", &regularized_incomplete_beta);

    py::class_<FoldPair>(m, "FoldPair")
        .def_readonly("train", &FoldPair::train)
        .def_readonly("test", &FoldPair::test);
    py::class_<FoldPlan>(m, "FoldPlan")
        .def_readonly("seed", &FoldPlan::seed)
        .def_readonly("draws", &FoldPlan::draws)
        .def("measurements", &FoldPlan::measurements);
    m.def("split_folds", &split_folds);

    // ---- synth / experiment -----------------------------------------------------------
    py::class_<SynthSpec>(m, "SynthSpec")
        .def(py::init<>())
        .def_readwrite("n_clusters", &SynthSpec::n_clusters)
        .def_readwrite("configs_per_cluster", &SynthSpec::configs_per_cluster)
        .def_readwrite("queries_per_cluster", &SynthSpec::queries_per_cluster)
        .def_readwrite("base_effectiveness", &SynthSpec::base_effectiveness)
        .def_readwrite("planted_gap", &SynthSpec::planted_gap)
        .def_readwrite("noise_sd", &SynthSpec::noise_sd)
        .def_readwrite("feature_dim", &SynthSpec::feature_dim)
        .def_readwrite("seed", &SynthSpec::seed);
    py::class_<SynthData>(m, "SynthData")
        .def_readonly("matrix", &SynthData::matrix)
        .def_readonly("features", &SynthData::features)
        .def_readonly("descriptors", &SynthData::descriptors)
        .def_readonly("query_cluster", &SynthData::query_cluster)
        .def_readonly("specialists", &SynthData::specialists)
        .def_readonly("generalist", &SynthData::generalist)
        .def("feature_records", &SynthData::feature_records);
    m.def("synth_generate", &synth_generate);

    py::class_<ExperimentOptions>(m, "ExperimentOptions")
        .def(py::init<>())
        .def_readwrite("methods", &ExperimentOptions::methods)
        .def_readwrite("draws", &ExperimentOptions::draws)
        .def_readwrite("seed", &ExperimentOptions::seed)
        .def_readwrite("k", &ExperimentOptions::k)
        .def_readwrite("objective", &ExperimentOptions::objective)
        .def_readwrite("beta", &ExperimentOptions::beta)
        .def_readwrite("zscore", &ExperimentOptions::zscore)
        .def_readwrite("match_depth", &ExperimentOptions::match_depth)
        .def_readwrite("sig_refs", &ExperimentOptions::sig_refs)
        .def_readwrite("phase_hook", &ExperimentOptions::phase_hook);
    py::class_<SignificanceMark>(m, "SignificanceMark")
        .def_readonly("reference", &SignificanceMark::reference)
        .def_readonly("t", &SignificanceMark::t)
        .def_readonly("p_raw", &SignificanceMark::p_raw)
        .def_readonly("p_corrected", &SignificanceMark::p_corrected)
        .def_readonly("significant", &SignificanceMark::significant);
    py::class_<MethodReport>(m, "MethodReport")
        .def_readonly("name", &MethodReport::name)
        .def_readonly("measurements", &MethodReport::measurements)
        .def_readonly("mean", &MethodReport::mean)
        .def_readonly("sd", &MethodReport::sd)
        .def_readonly("first_split", &MethodReport::first_split)
        .def_readonly("per_query", &MethodReport::per_query)
        .def_readonly("significance", &MethodReport::significance)
        .def_readonly("improved", &MethodReport::improved)
        .def_readonly("degraded", &MethodReport::degraded);
    py::class_<ExperimentReport>(m, "ExperimentReport")
        .def_readonly("metric_name", &ExperimentReport::metric_name)
        .def_readonly("queries", &ExperimentReport::queries)
        .def_readonly("sig_refs", &ExperimentReport::sig_refs)
        .def_readonly("methods", &ExperimentReport::methods)
        .def("method", &ExperimentReport::method)
        .def("to_tsv", &ExperimentReport::to_tsv)
        .def("to_markdown", &ExperimentReport::to_markdown);
    m.def("run_experiment", &run_experiment, py::arg("matrix"), py::arg("features"),
          py::arg("options"));

    m.def("set_worker_count", &set_worker_count);
}
