#include "sqp/baselines.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <unordered_map>

#include "sqp/rng.hpp"

namespace sqp {

namespace {

double train_mean(const EffectivenessMatrix& matrix, std::size_t config_idx,
                  const std::vector<std::size_t>& query_idx) {
    double sum = 0.0;
    for (std::size_t q : query_idx) {
        sum += matrix.score_at(config_idx, q);
    }
    return sum / static_cast<double>(query_idx.size());
}

std::vector<std::size_t> query_indices(const EffectivenessMatrix& matrix,
                                       const std::vector<QueryId>& queries) {
    if (queries.empty()) {
        throw contract_error("empty query set");
    }
    std::vector<std::size_t> idx;
    idx.reserve(queries.size());
    for (const QueryId& q : queries) {
        idx.push_back(matrix.query_index(q));
    }
    return idx;
}

// Best train-mean config among `candidates` (sorted), or nullopt when empty.
std::optional<ConfigurationId> best_of(const EffectivenessMatrix& matrix,
                                       const std::vector<ConfigurationId>& candidates,
                                       const std::vector<std::size_t>& query_idx) {
    std::optional<ConfigurationId> best;
    double best_mean = -std::numeric_limits<double>::infinity();
    for (const ConfigurationId& id : candidates) {
        const double mean = train_mean(matrix, matrix.config_index(id), query_idx);
        if (mean > best_mean) {
            best_mean = mean;
            best = id;
        }
    }
    return best;
}

}  // namespace

ConfigurationId best_trained(const EffectivenessMatrix& matrix,
                             const std::vector<QueryId>& train_queries) {
    auto qi = query_indices(matrix, train_queries);
    std::vector<ConfigurationId> candidates = matrix.configs();
    std::sort(candidates.begin(), candidates.end());
    return *best_of(matrix, candidates, qi);
}

std::vector<ConfigurationId> random_k(const std::vector<ConfigurationId>& pool, int k,
                                      std::uint64_t seed) {
    if (k < 0 || k > static_cast<int>(pool.size())) {
        throw contract_error("random_k: k=" + std::to_string(k) + " exceeds pool size " +
                             std::to_string(pool.size()));
    }
    std::vector<ConfigurationId> ids = pool;
    std::sort(ids.begin(), ids.end());
    Rng rng(seed);
    // Partial Fisher-Yates: position i gets a uniform pick from [i, n).
    for (int i = 0; i < k; ++i) {
        const std::size_t j = i + rng.bounded(ids.size() - i);
        std::swap(ids[i], ids[j]);
    }
    ids.resize(k);
    return ids;
}

OracleResult oracle(const EffectivenessMatrix& matrix, const std::vector<ConfigurationId>& subset,
                    const std::vector<QueryId>& queries) {
    if (subset.empty()) {
        throw contract_error("oracle over an empty configuration set");
    }
    std::vector<ConfigurationId> members = subset;
    std::sort(members.begin(), members.end());
    OracleResult result;
    double sum = 0.0;
    for (const QueryId& qid : queries) {
        const std::size_t q = matrix.query_index(qid);
        const ConfigurationId* best = nullptr;
        double best_score = -std::numeric_limits<double>::infinity();
        for (const ConfigurationId& cid : members) {
            const double s = matrix.score_at(matrix.config_index(cid), q);
            if (s > best_score) {
                best_score = s;
                best = &cid;
            }
        }
        result.per_query.emplace_back(qid, *best);
        sum += best_score;
    }
    result.mean = queries.empty() ? 0.0 : sum / static_cast<double>(queries.size());
    return result;
}

FusionNorm parse_fusion_norm(const std::string& text) {
    if (text == "minmax") {
        return FusionNorm::minmax;
    }
    if (text == "none") {
        return FusionNorm::none;
    }
    throw io_error("unknown normalization '" + text + "' (expected minmax or none)");
}

FusedRun comb_sum(const std::vector<RunList>& runs, FusionNorm normalization) {
    if (runs.empty()) {
        throw contract_error("comb_sum needs at least one run");
    }
    const QueryId& query_id = runs.front().query_id;
    for (const RunList& run : runs) {
        if (run.query_id != query_id) {
            throw contract_error("comb_sum given runs for different queries (" + query_id +
                                 " vs " + run.query_id + ")");
        }
    }
    FusedRun fused;
    fused.query_id = query_id;
    fused.normalization = normalization == FusionNorm::minmax ? "minmax" : "none";

    std::map<std::string, double> totals;  // doc -> fused score
    for (const RunList& run : runs) {
        fused.source_tags.push_back(run.tag);
        if (run.entries.empty()) {
            continue;
        }
        double lo = run.entries.front().score;
        double hi = lo;
        for (const RunEntry& entry : run.entries) {
            lo = std::min(lo, entry.score);
            hi = std::max(hi, entry.score);
        }
        for (const RunEntry& entry : run.entries) {
            double value = entry.score;
            if (normalization == FusionNorm::minmax) {
                if (hi > lo) {
                    value = (entry.score - lo) / (hi - lo);
                } else {
                    value = 1.0;  // degenerate range
                }
            }
            totals[entry.doc_id] += value;
        }
        if (normalization == FusionNorm::minmax && hi == lo) {
            warn("run '" + run.tag + "' query " + query_id +
                 ": all scores equal; min-max normalization maps every document to 1");
        }
    }
    for (const auto& [doc, score] : totals) {
        fused.entries.push_back(FusedEntry{doc, score});
    }
    std::stable_sort(fused.entries.begin(), fused.entries.end(),
                     [](const FusedEntry& a, const FusedEntry& b) {
                         if (a.score != b.score) {
                             return a.score > b.score;
                         }
                         return a.doc_id < b.doc_id;
                     });
    return fused;
}

RunList to_run_list(const FusedRun& fused, const std::string& tag) {
    RunList run;
    run.query_id = fused.query_id;
    run.tag = tag;
    run.entries.reserve(fused.entries.size());
    for (std::size_t i = 0; i < fused.entries.size(); ++i) {
        run.entries.push_back(
            RunEntry{fused.entries[i].doc_id, static_cast<int>(i + 1), fused.entries[i].score});
    }
    return run;
}

std::pair<ConfigurationId, ConfigurationId> trained_sqe(
    const std::vector<ConfigurationDescriptor>& descriptors, const EffectivenessMatrix& matrix,
    const std::vector<QueryId>& train_queries) {
    if (descriptors.empty()) {
        throw contract_error("trained_sqe needs configuration descriptors");
    }
    auto qi = query_indices(matrix, train_queries);

    std::unordered_map<ConfigurationId, const ConfigurationDescriptor*> by_id;
    std::vector<ConfigurationId> ids;
    bool any_expansion = false;
    bool any_plain = false;
    for (const ConfigurationDescriptor& d : descriptors) {
        d.validate();
        if (!matrix.has_config(d.config_id)) {
            throw contract_error("descriptor " + d.config_id + " is not in the matrix");
        }
        by_id[d.config_id] = &d;
        ids.push_back(d.config_id);
        (d.uses_expansion() ? any_expansion : any_plain) = true;
    }
    if (!any_expansion || !any_plain) {
        throw contract_error(
            "trained_sqe undefined: the pool has no expansion/no-expansion contrast");
    }
    std::sort(ids.begin(), ids.end());

    const ConfigurationId best = *best_of(matrix, ids, qi);
    const ConfigurationDescriptor& best_desc = *by_id.at(best);

    // Opposite expansion class, same retrieval model first.
    std::vector<ConfigurationId> same_model;
    std::vector<ConfigurationId> other_class;
    for (const ConfigurationId& id : ids) {
        const ConfigurationDescriptor& d = *by_id.at(id);
        if (d.uses_expansion() == best_desc.uses_expansion()) {
            continue;
        }
        other_class.push_back(id);
        if (d.retrieval_model == best_desc.retrieval_model) {
            same_model.push_back(id);
        }
    }
    auto counterpart = best_of(matrix, same_model.empty() ? other_class : same_model, qi);
    return {best, *counterpart};
}

}  // namespace sqp
