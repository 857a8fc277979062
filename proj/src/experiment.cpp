#include "sqp/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "sqp/baselines.hpp"
#include "sqp/matcher.hpp"
#include "sqp/parallel.hpp"
#include "sqp/rng.hpp"
#include "sqp/stats.hpp"

namespace sqp {

namespace {

enum class MethodKind {
    best_trained,
    risk_cosine,
    randomk_cosine,
    oracle_full,
    oracle_k,
    oracle_randomk,
};

struct MethodSpec {
    std::string name;
    MethodKind kind;
    std::optional<Objective> objective;  // override for erisk_/nrisk_
};

MethodSpec parse_method(const std::string& token) {
    if (token == "best_trained") {
        return {token, MethodKind::best_trained, std::nullopt};
    }
    if (token == "risk_cosine") {
        return {token, MethodKind::risk_cosine, std::nullopt};
    }
    if (token == "erisk_cosine") {
        return {token, MethodKind::risk_cosine, Objective::effectiveness};
    }
    if (token == "nrisk_cosine") {
        return {token, MethodKind::risk_cosine, Objective::query_count};
    }
    if (token == "randomk_cosine") {
        return {token, MethodKind::randomk_cosine, std::nullopt};
    }
    if (token == "oracle") {
        return {token, MethodKind::oracle_full, std::nullopt};
    }
    if (token == "oracle_k") {
        return {token, MethodKind::oracle_k, std::nullopt};
    }
    if (token == "oracle_randomk") {
        return {token, MethodKind::oracle_randomk, std::nullopt};
    }
    throw contract_error("unknown experiment method '" + token + "'");
}

bool needs_features(MethodKind kind) {
    return kind == MethodKind::risk_cosine || kind == MethodKind::randomk_cosine;
}

std::string fixed6(double value) {
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), "%.6f", value);
    return buffer;
}

// Per-(draw, direction) scores of one method over its test queries.
struct CellScores {
    std::vector<std::pair<QueryId, double>> test_scores;
};

}  // namespace

const MethodReport& ExperimentReport::method(const std::string& name) const {
    for (const MethodReport& m : methods) {
        if (m.name == name) {
            return m;
        }
    }
    throw contract_error("no method '" + name + "' in the report");
}

ExperimentReport run_experiment(const EffectivenessMatrix& matrix,
                                const std::vector<QueryFeatureVector>& features,
                                const ExperimentOptions& options) {
    if (options.methods.empty()) {
        throw contract_error("experiment needs at least one method");
    }
    std::vector<MethodSpec> specs;
    std::set<std::string> seen;
    bool any_matcher = false;
    for (const std::string& token : options.methods) {
        MethodSpec spec = parse_method(token);
        if (!seen.insert(spec.name).second) {
            throw contract_error("duplicate experiment method '" + spec.name + "'");
        }
        any_matcher = any_matcher || needs_features(spec.kind);
        specs.push_back(std::move(spec));
    }
    if (any_matcher && features.empty()) {
        throw contract_error("a cosine-routing method was requested but no features were given");
    }

    std::unordered_map<QueryId, const QueryFeatureVector*> features_by_query;
    for (const QueryFeatureVector& v : features) {
        features_by_query[v.query_id] = &v;
    }
    if (any_matcher) {
        for (const QueryId& qid : matrix.queries()) {
            if (!features_by_query.count(qid)) {
                throw contract_error("no feature vector for query " + qid);
            }
        }
    }

    const FoldPlan plan = split_folds(matrix.queries(), options.draws, options.seed);
    const std::size_t n_cells = plan.measurements();

    // Every (draw, direction) cell is independent given the immutable
    // matrix; method work within a cell shares the selection results.
    std::vector<std::vector<CellScores>> cells(n_cells,
                                               std::vector<CellScores>(specs.size()));
    parallel_for(n_cells, [&](std::size_t cell_idx) {
        const int draw = static_cast<int>(cell_idx / 2);
        const int direction = static_cast<int>(cell_idx % 2);
        const FoldPair& fold = plan.draws[draw][direction];

        if (options.phase_hook) {
            options.phase_hook(draw, direction, "select");
        }

        // Training-side work, shared across methods of this cell.
        const ConfigurationId baseline = best_trained(matrix, fold.train);
        std::map<char, SelectedPool> risk_pools;
        auto risk_pool_for = [&](Objective objective) -> const SelectedPool& {
            auto it = risk_pools.find(objective_code(objective));
            if (it == risk_pools.end()) {
                RiskParams params;
                params.objective = objective;
                params.beta = options.beta;
                params.k = options.k;
                params.baseline_id = baseline;
                it = risk_pools
                         .emplace(objective_code(objective),
                                  select_configurations(fold.train, matrix.configs(), matrix,
                                                        params))
                         .first;
            }
            return it->second;
        };

        std::vector<ConfigurationId> random_pool;
        bool need_random =
            std::any_of(specs.begin(), specs.end(), [](const MethodSpec& s) {
                return s.kind == MethodKind::randomk_cosine ||
                       s.kind == MethodKind::oracle_randomk;
            });
        if (need_random) {
            random_pool = random_k(matrix.configs(), options.k,
                                   seed_for(options.seed, 1000 + cell_idx));
        }

        auto train_vectors = [&]() {
            std::vector<QueryFeatureVector> vectors;
            vectors.reserve(fold.train.size());
            for (const QueryId& qid : fold.train) {
                vectors.push_back(*features_by_query.at(qid));
            }
            return vectors;
        };

        std::map<std::string, TrainedModel> models;  // method name -> model
        for (const MethodSpec& spec : specs) {
            if (spec.kind == MethodKind::risk_cosine) {
                const SelectedPool& pool =
                    risk_pool_for(spec.objective.value_or(options.objective));
                models.emplace(spec.name,
                               train_model(fold.train, pool, matrix, train_vectors(),
                                           options.zscore, "experiment",
                                           options.match_depth));
            } else if (spec.kind == MethodKind::randomk_cosine) {
                SelectedPool pool;
                pool.objective = options.objective;
                pool.beta = options.beta;
                pool.baseline_id = baseline;
                pool.metric_name = matrix.metric_name();
                for (const ConfigurationId& id : random_pool) {
                    pool.steps.push_back(SelectionStep{id, 0.0, 0.0, 0.0, 0.0});
                }
                models.emplace(spec.name,
                               train_model(fold.train, pool, matrix, train_vectors(),
                                           options.zscore, "experiment",
                                           options.match_depth));
            } else if (spec.kind == MethodKind::oracle_k) {
                risk_pool_for(options.objective);
            }
        }

        if (options.phase_hook) {
            options.phase_hook(draw, direction, "score");
        }

        for (std::size_t m = 0; m < specs.size(); ++m) {
            const MethodSpec& spec = specs[m];
            CellScores& out = cells[cell_idx][m];
            switch (spec.kind) {
                case MethodKind::best_trained: {
                    const std::size_t c = matrix.config_index(baseline);
                    for (const QueryId& qid : fold.test) {
                        out.test_scores.emplace_back(
                            qid, matrix.score_at(c, matrix.query_index(qid)));
                    }
                    break;
                }
                case MethodKind::risk_cosine:
                case MethodKind::randomk_cosine: {
                    const TrainedModel& model = models.at(spec.name);
                    for (const QueryId& qid : fold.test) {
                        MatchResult match =
                            best_match_configuration(model, *features_by_query.at(qid));
                        out.test_scores.emplace_back(
                            qid, matrix.score_at(matrix.config_index(match.config_id),
                                                 matrix.query_index(qid)));
                    }
                    break;
                }
                case MethodKind::oracle_full:
                case MethodKind::oracle_k:
                case MethodKind::oracle_randomk: {
                    std::vector<ConfigurationId> subset;
                    if (spec.kind == MethodKind::oracle_full) {
                        subset = matrix.configs();
                    } else if (spec.kind == MethodKind::oracle_k) {
                        subset = risk_pool_for(options.objective).config_ids();
                    } else {
                        subset = random_pool;
                    }
                    OracleResult o = oracle(matrix, subset, fold.test);
                    for (std::size_t i = 0; i < fold.test.size(); ++i) {
                        out.test_scores.emplace_back(
                            fold.test[i],
                            matrix.score_at(matrix.config_index(o.per_query[i].second),
                                            matrix.query_index(fold.test[i])));
                    }
                    break;
                }
            }
        }
    });

    ExperimentReport report;
    report.metric_name = matrix.metric_name();
    report.seed = options.seed;
    report.draws = options.draws;
    report.k = options.k;
    report.objective = options.objective;
    report.beta = options.beta;
    report.queries = matrix.queries();
    std::sort(report.queries.begin(), report.queries.end());
    report.sig_refs = options.sig_refs.empty()
                          ? std::vector<std::string>{specs.front().name}
                          : options.sig_refs;
    for (const std::string& ref : report.sig_refs) {
        if (!seen.count(ref)) {
            throw contract_error("significance reference '" + ref +
                                 "' is not among the experiment methods");
        }
    }

    std::unordered_map<QueryId, std::size_t> query_pos;
    for (std::size_t i = 0; i < report.queries.size(); ++i) {
        query_pos[report.queries[i]] = i;
    }

    for (std::size_t m = 0; m < specs.size(); ++m) {
        MethodReport method;
        method.name = specs[m].name;
        method.per_query.assign(report.queries.size(), 0.0);
        for (std::size_t cell_idx = 0; cell_idx < n_cells; ++cell_idx) {
            const CellScores& cell = cells[cell_idx][m];
            double sum = 0.0;
            for (const auto& [qid, score] : cell.test_scores) {
                sum += score;
                method.per_query[query_pos.at(qid)] += score;
            }
            method.measurements.push_back(sum / static_cast<double>(cell.test_scores.size()));
        }
        // Each query is tested exactly once per draw.
        for (double& v : method.per_query) {
            v /= static_cast<double>(options.draws);
        }
        double mean = 0.0;
        for (double v : method.measurements) {
            mean += v;
        }
        mean /= static_cast<double>(method.measurements.size());
        double variance = 0.0;
        for (double v : method.measurements) {
            variance += (v - mean) * (v - mean);
        }
        method.mean = mean;
        method.sd = method.measurements.size() > 1
                        ? std::sqrt(variance /
                                    static_cast<double>(method.measurements.size() - 1))
                        : 0.0;
        method.first_split = method.measurements.front();
        report.methods.push_back(std::move(method));
    }

    // Significance: every (method, reference) pair with method != reference
    // counts toward the Bonferroni family.
    int comparisons = 0;
    for (const MethodReport& method : report.methods) {
        for (const std::string& ref : report.sig_refs) {
            if (method.name != ref) {
                ++comparisons;
            }
        }
    }
    for (MethodReport& method : report.methods) {
        for (const std::string& ref : report.sig_refs) {
            if (method.name == ref) {
                continue;
            }
            const MethodReport& reference = report.method(ref);
            TTestResult t = paired_t_test(method.per_query, reference.per_query);
            SignificanceMark mark;
            mark.reference = ref;
            mark.t = t.t;
            mark.p_raw = t.p;
            mark.p_corrected = bonferroni(t.p, std::max(1, comparisons));
            mark.significant = mark.p_corrected < 0.05;
            method.significance.push_back(std::move(mark));
        }
        if (method.name != report.sig_refs.front()) {
            const MethodReport& reference = report.method(report.sig_refs.front());
            for (std::size_t q = 0; q < report.queries.size(); ++q) {
                if (method.per_query[q] > reference.per_query[q]) {
                    ++method.improved;
                } else if (method.per_query[q] < reference.per_query[q]) {
                    ++method.degraded;
                }
            }
        }
    }
    return report;
}

std::string ExperimentReport::to_tsv() const {
    std::ostringstream os;
    os << "# sqp experiment report\n";
    os << "# metric: " << metric_name << "\n";
    os << "# draws: " << draws << "\tseed: " << seed << "\tk: " << k << "\tobjective: "
       << objective_code(objective) << "\tbeta: " << fixed6(beta) << "\n";
    os << "# measurements: " << draws * 2 << " (draw-major, direction-minor)\n";
    os << "method\tmean\tsd\tfirst_split";
    for (int d = 0; d < draws; ++d) {
        os << "\td" << d << ".a\td" << d << ".b";
    }
    os << "\timproved_vs_" << sig_refs.front() << "\tdegraded_vs_" << sig_refs.front();
    for (const std::string& ref : sig_refs) {
        os << "\tt_vs_" << ref << "\tp_vs_" << ref << "\tp_bonf_vs_" << ref << "\tsig_vs_"
           << ref;
    }
    os << "\n";
    for (const MethodReport& method : methods) {
        os << method.name << '\t' << fixed6(method.mean) << '\t' << fixed6(method.sd) << '\t'
           << fixed6(method.first_split);
        for (double v : method.measurements) {
            os << '\t' << fixed6(v);
        }
        if (method.name == sig_refs.front()) {
            os << "\t-\t-";
        } else {
            os << '\t' << method.improved << '\t' << method.degraded;
        }
        for (const std::string& ref : sig_refs) {
            const SignificanceMark* mark = nullptr;
            for (const SignificanceMark& candidate : method.significance) {
                if (candidate.reference == ref) {
                    mark = &candidate;
                }
            }
            if (!mark) {
                os << "\t-\t-\t-\t-";
            } else {
                os << '\t' << fixed6(mark->t) << '\t' << fixed6(mark->p_raw) << '\t'
                   << fixed6(mark->p_corrected) << '\t' << (mark->significant ? "yes" : "no");
            }
        }
        os << "\n";
    }
    os << "# per-query mean test scores (over draws)\n";
    os << "query";
    for (const MethodReport& method : methods) {
        os << '\t' << method.name;
    }
    os << "\n";
    for (std::size_t q = 0; q < queries.size(); ++q) {
        os << queries[q];
        for (const MethodReport& method : methods) {
            os << '\t' << fixed6(method.per_query[q]);
        }
        os << "\n";
    }
    return os.str();
}

std::string ExperimentReport::to_markdown() const {
    std::ostringstream os;
    os << "# Experiment report\n\n";
    os << "Metric `" << metric_name << "`, " << draws << " draws x 2 folds, seed " << seed
       << ", K=" << k << ", objective " << objective_code(objective) << ", beta "
       << fixed6(beta) << ". Mean and sample SD over " << draws * 2
       << " train/test measurements; improved/degraded query counts and paired t-tests "
          "(Bonferroni-corrected, p<0.05) are against `"
       << sig_refs.front() << "`.\n\n";
    os << "| Method | Mean | SD | Improved | Degraded | Significant vs |\n";
    os << "|---|---|---|---|---|---|\n";
    for (const MethodReport& method : methods) {
        os << "| " << method.name << " | " << fixed6(method.mean) << " | " << fixed6(method.sd)
           << " | ";
        if (method.name == sig_refs.front()) {
            os << "- | - | ";
        } else {
            os << method.improved << " | " << method.degraded << " | ";
        }
        bool first = true;
        for (const SignificanceMark& mark : method.significance) {
            if (mark.significant) {
                os << (first ? "" : ", ") << mark.reference;
                first = false;
            }
        }
        if (first) {
            os << "-";
        }
        os << " |\n";
    }
    return os.str();
}

}  // namespace sqp
