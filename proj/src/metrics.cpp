#include "sqp/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

#include "sqp/io.hpp"
#include "sqp/parallel.hpp"

namespace sqp {

namespace {

int parse_cutoff(const std::string& text, const std::string& spec) {
    int value = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
    if (ec != std::errc() || ptr != text.data() + text.size() || value < 1) {
        throw io_error("metric spec '" + spec + "': bad cutoff '" + text + "'");
    }
    return value;
}

}  // namespace

MetricSpec MetricSpec::parse(const std::string& text) {
    MetricSpec spec;
    if (text == "ap") {
        spec.kind = Kind::average_precision;
        return spec;
    }
    if (text == "rr") {
        spec.kind = Kind::reciprocal_rank;
        return spec;
    }
    if (text.rfind("p@", 0) == 0) {
        spec.kind = Kind::precision;
        spec.k = parse_cutoff(text.substr(2), text);
        return spec;
    }
    if (text.rfind("ndcg@", 0) == 0) {
        spec.kind = Kind::ndcg;
        spec.k = parse_cutoff(text.substr(5), text);
        return spec;
    }
    if (text.rfind("rbp:", 0) == 0) {
        spec.kind = Kind::rbp;
        std::string rest = text.substr(4);
        std::size_t colon = rest.find(':');
        std::string p_text = colon == std::string::npos ? rest : rest.substr(0, colon);
        double p = 0.0;
        auto [ptr, ec] = std::from_chars(p_text.data(), p_text.data() + p_text.size(), p);
        if (ec != std::errc() || ptr != p_text.data() + p_text.size()) {
            throw io_error("metric spec '" + text + "': bad persistence '" + p_text + "'");
        }
        if (!(p > 0.0 && p < 1.0)) {
            throw io_error("metric spec '" + text + "': persistence must be in (0, 1)");
        }
        spec.persistence = p;
        if (colon != std::string::npos) {
            spec.depth = parse_cutoff(rest.substr(colon + 1), text);
        }
        return spec;
    }
    throw io_error("unknown metric spec '" + text + "' (expected p@K, ap, ndcg@K, rr, rbp:P[:D])");
}

std::string MetricSpec::to_string() const {
    std::ostringstream os;
    switch (kind) {
        case Kind::precision:
            os << "p@" << k;
            break;
        case Kind::average_precision:
            os << "ap";
            break;
        case Kind::ndcg:
            os << "ndcg@" << k;
            break;
        case Kind::reciprocal_rank:
            os << "rr";
            break;
        case Kind::rbp:
            os << "rbp:" << format_double(persistence);
            if (depth) {
                os << ":" << *depth;
            }
            break;
    }
    return os.str();
}

double precision_at_k(const RunList& run, const Qrels& qrels, int k) {
    if (k < 1) {
        throw contract_error("precision_at_k requires k >= 1");
    }
    int relevant = 0;
    const int limit = std::min<int>(k, static_cast<int>(run.entries.size()));
    for (int i = 0; i < limit; ++i) {
        if (qrels.is_relevant(run.query_id, run.entries[i].doc_id)) {
            ++relevant;
        }
    }
    return static_cast<double>(relevant) / k;
}

double average_precision(const RunList& run, const Qrels& qrels) {
    const int total_relevant = qrels.relevant_count(run.query_id);
    if (total_relevant == 0) {
        warn("query " + run.query_id + " has no relevant document; ap = 0");
        return 0.0;
    }
    double sum = 0.0;
    int seen_relevant = 0;
    for (std::size_t i = 0; i < run.entries.size(); ++i) {
        if (qrels.is_relevant(run.query_id, run.entries[i].doc_id)) {
            ++seen_relevant;
            sum += static_cast<double>(seen_relevant) / static_cast<double>(i + 1);
        }
    }
    return sum / total_relevant;
}

double ndcg_at_k(const RunList& run, const Qrels& qrels, int k) {
    if (k < 1) {
        throw contract_error("ndcg_at_k requires k >= 1");
    }
    auto gain = [](int grade) { return grade > 0 ? std::exp2(grade) - 1.0 : 0.0; };
    std::vector<int> ideal = qrels.grades_sorted_desc(run.query_id);
    double idcg = 0.0;
    for (int i = 0; i < k && i < static_cast<int>(ideal.size()); ++i) {
        idcg += gain(ideal[i]) / std::log2(i + 2.0);
    }
    if (idcg == 0.0) {
        warn("query " + run.query_id + " has no relevant document; ndcg = 0");
        return 0.0;
    }
    double dcg = 0.0;
    const int limit = std::min<int>(k, static_cast<int>(run.entries.size()));
    for (int i = 0; i < limit; ++i) {
        auto grade = qrels.grade(run.query_id, run.entries[i].doc_id);
        if (grade) {
            dcg += gain(*grade) / std::log2(i + 2.0);
        }
    }
    return dcg / idcg;
}

double reciprocal_rank(const RunList& run, const Qrels& qrels) {
    for (std::size_t i = 0; i < run.entries.size(); ++i) {
        if (qrels.is_relevant(run.query_id, run.entries[i].doc_id)) {
            return 1.0 / static_cast<double>(i + 1);
        }
    }
    return 0.0;
}

RbpScore rbp(const RunList& run, const Qrels& qrels, double persistence, int depth) {
    if (!(persistence > 0.0 && persistence < 1.0)) {
        throw contract_error("rbp persistence must be in (0, 1)");
    }
    if (depth < 1) {
        throw contract_error("rbp depth must be >= 1");
    }
    const double p = persistence;
    RbpScore score;
    double weight = 1.0 - p;  // (1-p) * p^(i-1) at rank i
    for (int i = 1; i <= depth; ++i, weight *= p) {
        if (i <= static_cast<int>(run.entries.size())) {
            const std::string& doc = run.entries[i - 1].doc_id;
            auto grade = qrels.grade(run.query_id, doc);
            if (!grade) {
                score.residual += weight;
            } else if (*grade > 0) {
                score.base += weight;
            }
        } else {
            // Ranks past the run's end are unknown: count them unjudged.
            score.residual += weight;
        }
    }
    score.residual += std::pow(p, depth);
    return score;
}

int default_rbp_depth(const RunList& run) {
    return std::max(1, std::min<int>(static_cast<int>(run.entries.size()), 1000));
}

double evaluate_metric(const MetricSpec& spec, const RunList& run, const Qrels& qrels) {
    switch (spec.kind) {
        case MetricSpec::Kind::precision:
            return precision_at_k(run, qrels, spec.k);
        case MetricSpec::Kind::average_precision:
            return average_precision(run, qrels);
        case MetricSpec::Kind::ndcg:
            return ndcg_at_k(run, qrels, spec.k);
        case MetricSpec::Kind::reciprocal_rank:
            return reciprocal_rank(run, qrels);
        case MetricSpec::Kind::rbp:
            return rbp(run, qrels, spec.persistence,
                       spec.depth ? *spec.depth : default_rbp_depth(run))
                .base;
    }
    throw contract_error("unhandled metric kind");
}

EffectivenessMatrix build_matrix(
    const std::map<ConfigurationId, std::vector<RunList>>& runs_by_config, const Qrels& qrels,
    const MetricSpec& spec, std::vector<RbpResidualEntry>* residuals) {
    if (runs_by_config.empty()) {
        throw contract_error("build_matrix requires at least one configuration");
    }
    if (qrels.queries().empty()) {
        throw contract_error("build_matrix requires non-empty qrels");
    }
    struct Cell {
        double score;
        double residual;
    };
    std::vector<const std::vector<RunList>*> config_runs;
    std::vector<ConfigurationId> config_ids;
    for (const auto& [config_id, runs] : runs_by_config) {
        config_ids.push_back(config_id);
        config_runs.push_back(&runs);
    }
    const std::vector<QueryId>& queries = qrels.queries();
    const std::size_t n_configs = config_ids.size();
    const std::size_t n_queries = queries.size();

    // Resolve each (config, query) run up front so gaps fail before scoring.
    std::vector<const RunList*> run_of(n_configs * n_queries, nullptr);
    for (std::size_t c = 0; c < n_configs; ++c) {
        std::unordered_map<QueryId, const RunList*> by_query;
        for (const RunList& run : *config_runs[c]) {
            by_query[run.query_id] = &run;
        }
        for (std::size_t q = 0; q < n_queries; ++q) {
            auto it = by_query.find(queries[q]);
            if (it == by_query.end()) {
                throw contract_error("configuration " + config_ids[c] + " has no run for query " +
                                     queries[q]);
            }
            run_of[c * n_queries + q] = it->second;
        }
    }

    std::vector<Cell> cells(n_configs * n_queries);
    parallel_for(n_configs * n_queries, [&](std::size_t i) {
        const RunList& run = *run_of[i];
        Cell cell{0.0, 0.0};
        if (spec.kind == MetricSpec::Kind::rbp) {
            RbpScore s = rbp(run, qrels, spec.persistence,
                             spec.depth ? *spec.depth : default_rbp_depth(run));
            cell.score = s.base;
            cell.residual = s.residual;
        } else {
            cell.score = evaluate_metric(spec, run, qrels);
        }
        cells[i] = cell;
    });

    EffectivenessMatrix matrix(spec.to_string());
    for (std::size_t c = 0; c < n_configs; ++c) {
        for (std::size_t q = 0; q < n_queries; ++q) {
            matrix.add_cell(config_ids[c], queries[q], cells[c * n_queries + q].score);
            if (residuals && spec.kind == MetricSpec::Kind::rbp) {
                residuals->push_back(RbpResidualEntry{config_ids[c], queries[q],
                                                      cells[c * n_queries + q].score,
                                                      cells[c * n_queries + q].residual});
            }
        }
    }
    matrix.finalize();
    return matrix;
}

}  // namespace sqp
