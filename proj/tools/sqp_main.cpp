// sqp: risk-sensitive selection of search configurations and per-query
// configuration routing over precomputed effectiveness matrices.

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "sqp/baselines.hpp"
#include "sqp/experiment.hpp"
#include "sqp/io.hpp"
#include "sqp/matcher.hpp"
#include "sqp/metrics.hpp"
#include "sqp/parallel.hpp"
#include "sqp/risk.hpp"
#include "sqp/synth.hpp"
#include "sqp/types.hpp"

namespace fs = std::filesystem;
using namespace sqp;

namespace {

std::vector<std::string> split_csv(const std::string& text) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t comma = text.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(text.substr(start));
            break;
        }
        out.push_back(text.substr(start, comma - start));
        start = comma + 1;
    }
    out.erase(std::remove(out.begin(), out.end(), std::string()), out.end());
    return out;
}

void write_text(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw io_error("cannot write " + path.string());
    }
    out << content;
}

std::string read_text(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw io_error("cannot open " + path.string());
    }
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}

struct EvalArgs {
    std::string runs_dir;
    std::string qrels_path;
    std::string metric;
    std::string out;
    std::string rbp_residuals;
};

void run_eval(const EvalArgs& args) {
    const MetricSpec spec = MetricSpec::parse(args.metric);
    const Qrels qrels = load_qrels(args.qrels_path);

    std::vector<fs::path> files;
    if (!fs::is_directory(args.runs_dir)) {
        throw io_error(args.runs_dir + " is not a directory");
    }
    for (const auto& entry : fs::directory_iterator(args.runs_dir)) {
        if (entry.is_regular_file()) {
            files.push_back(entry.path());
        }
    }
    if (files.empty()) {
        throw io_error("no run files in " + args.runs_dir);
    }
    std::sort(files.begin(), files.end());

    std::map<ConfigurationId, std::vector<RunList>> runs;
    for (const fs::path& file : files) {
        const ConfigurationId config_id = file.stem().string();
        if (runs.count(config_id)) {
            throw io_error("two run files share the configuration id " + config_id);
        }
        runs[config_id] = load_runs(file);
    }

    std::vector<RbpResidualEntry> residuals;
    const bool want_residuals = !args.rbp_residuals.empty();
    if (want_residuals && spec.kind != MetricSpec::Kind::rbp) {
        warn("--rbp-residuals ignored for metric " + spec.to_string());
    }
    EffectivenessMatrix matrix =
        build_matrix(runs, qrels, spec, want_residuals ? &residuals : nullptr);
    save_matrix(matrix, args.out);

    if (want_residuals && spec.kind == MetricSpec::Kind::rbp) {
        std::ostringstream os;
        os << "# metric: " << spec.to_string() << "\n";
        os << "config_id\tquery_id\tbase\tresidual\n";
        for (const RbpResidualEntry& entry : residuals) {
            os << entry.config_id << '\t' << entry.query_id << '\t'
               << format_double(entry.base) << '\t' << format_double(entry.residual) << '\n';
        }
        write_text(args.rbp_residuals, os.str());
    }
}

struct SelectArgs {
    std::string matrix_path;
    std::string baseline;
    std::string objective = "e";
    double beta = 0.0;
    int k = 0;
    std::string out;
};

void run_select(const SelectArgs& args) {
    const EffectivenessMatrix matrix = load_matrix(args.matrix_path);
    RiskParams params;
    params.objective = parse_objective(args.objective);
    params.beta = args.beta;
    params.k = args.k;
    params.baseline_id = args.baseline;
    SelectedPool pool =
        select_configurations(matrix.queries(), matrix.configs(), matrix, params);
    write_text(args.out, pool.to_json_string());
}

struct TrainArgs {
    std::string matrix_path;
    std::string pool_path;
    std::string features_path;
    bool zscore = false;
    int depth = 10;
    std::string out;
};

void run_train(const TrainArgs& args) {
    const EffectivenessMatrix matrix = load_matrix(args.matrix_path);
    const SelectedPool pool = SelectedPool::from_json_string(read_text(args.pool_path));
    const auto records = load_features(args.features_path);
    const auto vectors = aggregate_all(records, args.depth);
    TrainedModel model =
        train_model(matrix.queries(), pool, matrix, vectors, args.zscore,
                    fs::path(args.features_path).filename().string(), args.depth);
    write_text(args.out, model.to_json_string());
}

struct MatchArgs {
    std::string model_path;
    std::string features_path;
    std::string out;
};

void run_match(const MatchArgs& args) {
    const TrainedModel model = TrainedModel::from_json_string(read_text(args.model_path));
    const auto records = load_features(args.features_path);
    const auto vectors = aggregate_all(records, model.aggregation_depth);
    std::ostringstream os;
    os << "# test_query_id\tconfig_id\tmatched_train_query\tsimilarity\n";
    for (const QueryFeatureVector& vector : vectors) {
        MatchResult match = best_match_configuration(model, vector);
        os << vector.query_id << '\t' << match.config_id << '\t' << match.matched_query << '\t'
           << format_double(match.similarity) << '\n';
    }
    write_text(args.out, os.str());
}

struct FuseArgs {
    std::string runs_csv;
    std::string norm = "minmax";
    std::string out;
};

void run_fuse(const FuseArgs& args) {
    const FusionNorm norm = parse_fusion_norm(args.norm);
    const std::vector<std::string> files = split_csv(args.runs_csv);
    if (files.empty()) {
        throw io_error("fuse needs at least one run file");
    }
    std::vector<QueryId> order;
    std::map<QueryId, std::vector<RunList>> by_query;
    for (const std::string& file : files) {
        for (RunList& run : load_runs(file)) {
            auto it = by_query.find(run.query_id);
            if (it == by_query.end()) {
                order.push_back(run.query_id);
                it = by_query.emplace(run.query_id, std::vector<RunList>{}).first;
            }
            it->second.push_back(std::move(run));
        }
    }
    std::vector<RunList> fused;
    for (const QueryId& qid : order) {
        fused.push_back(to_run_list(comb_sum(by_query[qid], norm)));
    }
    save_runs(fused, args.out);
}

struct ExperimentArgs {
    std::string matrix_path;
    std::string features_path;
    std::string methods = "best_trained,erisk_cosine";
    int draws = 3;
    std::uint64_t seed = 42;
    int k = 20;
    std::string objective = "e";
    double beta = 0.0;
    bool zscore = false;
    int depth = 10;
    std::string sig_refs;
    std::string out;
};

void run_experiment_cmd(const ExperimentArgs& args) {
    const EffectivenessMatrix matrix = load_matrix(args.matrix_path);
    std::vector<QueryFeatureVector> features;
    if (!args.features_path.empty()) {
        features = aggregate_all(load_features(args.features_path), args.depth);
    }
    ExperimentOptions options;
    options.methods = split_csv(args.methods);
    options.draws = args.draws;
    options.seed = args.seed;
    options.k = args.k;
    options.objective = parse_objective(args.objective);
    options.beta = args.beta;
    options.zscore = args.zscore;
    options.match_depth = args.depth;
    if (!args.sig_refs.empty()) {
        options.sig_refs = split_csv(args.sig_refs);
    }
    ExperimentReport report = run_experiment(matrix, features, options);

    std::string stem = args.out;
    for (const char* suffix : {".tsv", ".md"}) {
        if (stem.size() > 4 && stem.ends_with(suffix)) {
            stem.resize(stem.size() - 4);
        }
    }
    write_text(stem + ".tsv", report.to_tsv());
    write_text(stem + ".md", report.to_markdown());
}

struct SynthArgs {
    int clusters = 4;
    int configs_per_cluster = 3;
    int queries_per_cluster = 10;
    double gap = 0.3;
    double noise = 0.02;
    double base = 0.3;
    int feature_dim = 0;
    std::uint64_t seed = 1;
    std::string out_prefix;
};

void run_synth(const SynthArgs& args) {
    SynthSpec spec;
    spec.n_clusters = args.clusters;
    spec.configs_per_cluster = args.configs_per_cluster;
    spec.queries_per_cluster = args.queries_per_cluster;
    spec.planted_gap = args.gap;
    spec.noise_sd = args.noise;
    spec.base_effectiveness = args.base;
    spec.feature_dim = args.feature_dim;
    spec.seed = args.seed;
    SynthData data = synth_generate(spec);
    save_matrix(data.matrix, args.out_prefix + ".matrix.tsv");
    save_features(data.feature_records(), args.out_prefix + ".features.tsv");
    save_descriptors(data.descriptors, args.out_prefix + ".descriptors.tsv");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"selective query processing toolkit"};
    app.require_subcommand(1);

    int workers = 0;
    app.add_option("--workers", workers, "worker threads (default: SQP_WORKERS or 1)");

    EvalArgs eval_args;
    auto* eval = app.add_subcommand("eval", "score run files into an effectiveness matrix");
    eval->add_option("--runs", eval_args.runs_dir, "directory of run files (one per config)")
        ->required();
    eval->add_option("--qrels", eval_args.qrels_path, "qrels file")->required();
    eval->add_option("--metric", eval_args.metric, "p@K | ap | ndcg@K | rr | rbp:P[:D]")
        ->required();
    eval->add_option("--out", eval_args.out, "output matrix TSV")->required();
    eval->add_option("--rbp-residuals", eval_args.rbp_residuals,
                     "side report of RBP residuals (rbp metric only)");

    SelectArgs select_args;
    auto* select = app.add_subcommand("select", "greedy risk-sensitive pool selection");
    select->add_option("--matrix", select_args.matrix_path, "effectiveness matrix TSV")
        ->required();
    select->add_option("--baseline", select_args.baseline, "baseline configuration id")
        ->required();
    select->add_option("--objective", select_args.objective, "e (effectiveness) | n (queries)");
    select->add_option("--beta", select_args.beta, "risk-sensitivity (risk weight 1+beta)");
    select->add_option("--k", select_args.k, "configurations to select")->required();
    select->add_option("--out", select_args.out, "output pool JSON")->required();

    TrainArgs train_args;
    auto* train = app.add_subcommand("train", "build the query-routing model");
    train->add_option("--matrix", train_args.matrix_path, "effectiveness matrix TSV")
        ->required();
    train->add_option("--pool", train_args.pool_path, "selected pool JSON")->required();
    train->add_option("--features", train_args.features_path, "raw features TSV")->required();
    train->add_flag("--zscore", train_args.zscore, "z-score feature dimensions before cosine");
    train->add_option("--depth", train_args.depth, "documents aggregated per query");
    train->add_option("--out", train_args.out, "output model JSON")->required();

    MatchArgs match_args;
    auto* match = app.add_subcommand("match", "route queries to configurations");
    match->add_option("--model", match_args.model_path, "model JSON")->required();
    match->add_option("--features", match_args.features_path, "raw features TSV")->required();
    match->add_option("--out", match_args.out, "output assignments TSV")->required();

    FuseArgs fuse_args;
    auto* fuse = app.add_subcommand("fuse", "CombSUM fusion of run files");
    fuse->add_option("--runs", fuse_args.runs_csv, "comma-separated run files")->required();
    fuse->add_option("--norm", fuse_args.norm, "minmax | none");
    fuse->add_option("--out", fuse_args.out, "output run file")->required();

    ExperimentArgs experiment_args;
    auto* experiment = app.add_subcommand("experiment", "cross-validated method comparison");
    experiment->add_option("--matrix", experiment_args.matrix_path, "effectiveness matrix TSV")
        ->required();
    experiment->add_option("--features", experiment_args.features_path, "raw features TSV");
    experiment->add_option("--methods", experiment_args.methods,
                           "comma-separated method tokens");
    experiment->add_option("--draws", experiment_args.draws, "cross-validation draws");
    experiment->add_option("--seed", experiment_args.seed, "shuffle seed");
    experiment->add_option("--k", experiment_args.k, "pool size for selection methods");
    experiment->add_option("--objective", experiment_args.objective, "e | n");
    experiment->add_option("--beta", experiment_args.beta, "risk-sensitivity parameter");
    experiment->add_flag("--zscore", experiment_args.zscore, "z-score features before cosine");
    experiment->add_option("--depth", experiment_args.depth, "documents aggregated per query");
    experiment->add_option("--sig-refs", experiment_args.sig_refs,
                           "comma-separated reference methods for significance marks");
    experiment->add_option("--out", experiment_args.out, "report stem; writes <stem>.{tsv,md}")
        ->required();

    SynthArgs synth_args;
    auto* synth = app.add_subcommand("synth", "generate a synthetic clustered landscape");
    synth->add_option("--clusters", synth_args.clusters, "number of query clusters");
    synth->add_option("--configs-per-cluster", synth_args.configs_per_cluster,
                      "configurations per cluster");
    synth->add_option("--queries-per-cluster", synth_args.queries_per_cluster,
                      "queries per cluster");
    synth->add_option("--gap", synth_args.gap, "planted specialist advantage");
    synth->add_option("--noise", synth_args.noise, "score and feature noise sd");
    synth->add_option("--base", synth_args.base, "base effectiveness level");
    synth->add_option("--feature-dim", synth_args.feature_dim,
                      "feature dimension (0 = clusters)");
    synth->add_option("--seed", synth_args.seed, "generator seed");
    synth->add_option("--out-prefix", synth_args.out_prefix, "output file prefix")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    try {
        if (workers > 0) {
            set_worker_count(workers);
        }
        if (eval->parsed()) {
            run_eval(eval_args);
        } else if (select->parsed()) {
            run_select(select_args);
        } else if (train->parsed()) {
            run_train(train_args);
        } else if (match->parsed()) {
            run_match(match_args);
        } else if (fuse->parsed()) {
            run_fuse(fuse_args);
        } else if (experiment->parsed()) {
            run_experiment_cmd(experiment_args);
        } else if (synth->parsed()) {
            run_synth(synth_args);
        }
    } catch (const io_error& e) {
        std::cerr << "sqp: error: " << e.what() << '\n';
        return 2;
    } catch (const contract_error& e) {
        std::cerr << "sqp: error: " << e.what() << '\n';
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "sqp: error: " << e.what() << '\n';
        return 3;
    }
    return 0;
}
