#include "sqp/risk.hpp"

#include <algorithm>
#include <limits>

#include <nlohmann/json.hpp>

#include "sqp/io.hpp"

namespace sqp {

namespace {

using ordered_json = nlohmann::ordered_json;

std::vector<std::size_t> query_indices(const EffectivenessMatrix& matrix,
                                       const std::vector<QueryId>& queries) {
    std::vector<std::size_t> idx;
    idx.reserve(queries.size());
    for (const QueryId& q : queries) {
        idx.push_back(matrix.query_index(q));
    }
    return idx;
}

// Per-query max of the reference set, evaluated through the matrix so the
// access audit hook sees every read.
std::vector<double> envelope_row(const std::vector<ConfigurationId>& reference_set,
                                 const EffectivenessMatrix& matrix,
                                 const std::vector<std::size_t>& query_idx) {
    if (reference_set.empty()) {
        throw contract_error("envelope over an empty configuration set");
    }
    std::vector<double> env(query_idx.size(), -std::numeric_limits<double>::infinity());
    for (const ConfigurationId& id : reference_set) {
        const std::size_t c = matrix.config_index(id);
        for (std::size_t i = 0; i < query_idx.size(); ++i) {
            env[i] = std::max(env[i], matrix.score_at(c, query_idx[i]));
        }
    }
    return env;
}

struct RiskReward {
    double risk = 0.0;
    double reward = 0.0;
};

RiskReward accumulate(Objective objective, const EffectivenessMatrix& matrix,
                      std::size_t candidate_idx, const std::vector<double>& env,
                      const std::vector<std::size_t>& query_idx) {
    if (query_idx.empty()) {
        throw contract_error("risk/reward over an empty query set");
    }
    RiskReward acc;
    for (std::size_t i = 0; i < query_idx.size(); ++i) {
        const double score = matrix.score_at(candidate_idx, query_idx[i]);
        const double drop = env[i] - score;
        if (objective == Objective::effectiveness) {
            if (drop > 0.0) {
                acc.risk += drop;
            } else {
                acc.reward += -drop;
            }
        } else {
            if (drop > 0.0) {
                acc.risk += 1.0;
            } else if (drop < 0.0) {
                acc.reward += 1.0;
            }
        }
    }
    acc.risk /= static_cast<double>(query_idx.size());
    acc.reward /= static_cast<double>(query_idx.size());
    return acc;
}

GainBreakdown breakdown_for(const ConfigurationId& candidate, const RiskReward& rr, double beta) {
    GainBreakdown g;
    g.config_id = candidate;
    g.risk = rr.risk;
    g.reward = rr.reward;
    g.gain = rr.reward - (1.0 + beta) * rr.risk;
    return g;
}

// Shared greedy core: candidates sorted by id so the argmax tie-break is
// independent of pool input order.
ConfigurationId best_candidate(const std::vector<ConfigurationId>& pool,
                               const EffectivenessMatrix& matrix, const RiskParams& params,
                               const std::vector<double>& env,
                               const std::vector<std::size_t>& query_idx,
                               GainBreakdown* winner_out) {
    if (pool.empty()) {
        throw contract_error("get_best_rsc over an empty pool");
    }
    std::vector<ConfigurationId> candidates = pool;
    std::sort(candidates.begin(), candidates.end());
    bool have_winner = false;
    GainBreakdown winner;
    for (const ConfigurationId& candidate : candidates) {
        RiskReward rr =
            accumulate(params.objective, matrix, matrix.config_index(candidate), env, query_idx);
        GainBreakdown g = breakdown_for(candidate, rr, params.beta);
        if (!have_winner || g.gain > winner.gain) {
            winner = g;
            have_winner = true;
        }
    }
    if (winner_out) {
        *winner_out = winner;
    }
    return winner.config_id;
}

std::string objective_name(Objective objective) {
    return objective == Objective::effectiveness ? "e" : "n";
}

}  // namespace

char objective_code(Objective objective) {
    return objective == Objective::effectiveness ? 'e' : 'n';
}

Objective parse_objective(const std::string& text) {
    if (text == "e" || text == "E") {
        return Objective::effectiveness;
    }
    if (text == "n" || text == "N") {
        return Objective::query_count;
    }
    throw io_error("unknown objective '" + text + "' (expected e or n)");
}

std::vector<ConfigurationId> SelectedPool::config_ids() const {
    std::vector<ConfigurationId> ids;
    ids.reserve(steps.size());
    for (const SelectionStep& step : steps) {
        ids.push_back(step.config_id);
    }
    return ids;
}

std::string SelectedPool::to_json_string() const {
    ordered_json doc;
    doc["objective"] = objective_name(objective);
    doc["beta"] = beta;
    doc["baseline"] = baseline_id;
    doc["metric"] = metric_name;
    doc["steps"] = ordered_json::array();
    for (const SelectionStep& step : steps) {
        ordered_json s;
        s["config_id"] = step.config_id;
        s["risk"] = step.risk;
        s["reward"] = step.reward;
        s["gain"] = step.gain;
        s["envelope_mean_after"] = step.envelope_mean_after;
        doc["steps"].push_back(std::move(s));
    }
    return doc.dump(2) + "\n";
}

SelectedPool SelectedPool::from_json_string(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("bad pool JSON: ") + e.what());
    }
    SelectedPool pool;
    try {
        pool.objective = parse_objective(doc.at("objective").get<std::string>());
        pool.beta = doc.at("beta").get<double>();
        pool.baseline_id = doc.at("baseline").get<std::string>();
        pool.metric_name = doc.value("metric", std::string());
        for (const auto& s : doc.at("steps")) {
            SelectionStep step;
            step.config_id = s.at("config_id").get<std::string>();
            step.risk = s.at("risk").get<double>();
            step.reward = s.at("reward").get<double>();
            step.gain = s.at("gain").get<double>();
            step.envelope_mean_after = s.at("envelope_mean_after").get<double>();
            pool.steps.push_back(std::move(step));
        }
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("bad pool JSON: ") + e.what());
    }
    return pool;
}

double envelope(const std::vector<ConfigurationId>& reference_set, const QueryId& query,
                const EffectivenessMatrix& matrix) {
    std::vector<std::size_t> qi{matrix.query_index(query)};
    return envelope_row(reference_set, matrix, qi)[0];
}

double e_risk(const ConfigurationId& candidate, const std::vector<ConfigurationId>& reference_set,
              const EffectivenessMatrix& matrix, const std::vector<QueryId>& queries) {
    auto qi = query_indices(matrix, queries);
    auto env = envelope_row(reference_set, matrix, qi);
    return accumulate(Objective::effectiveness, matrix, matrix.config_index(candidate), env, qi)
        .risk;
}

double e_reward(const ConfigurationId& candidate,
                const std::vector<ConfigurationId>& reference_set,
                const EffectivenessMatrix& matrix, const std::vector<QueryId>& queries) {
    auto qi = query_indices(matrix, queries);
    auto env = envelope_row(reference_set, matrix, qi);
    return accumulate(Objective::effectiveness, matrix, matrix.config_index(candidate), env, qi)
        .reward;
}

double n_risk(const ConfigurationId& candidate, const std::vector<ConfigurationId>& reference_set,
              const EffectivenessMatrix& matrix, const std::vector<QueryId>& queries) {
    auto qi = query_indices(matrix, queries);
    auto env = envelope_row(reference_set, matrix, qi);
    return accumulate(Objective::query_count, matrix, matrix.config_index(candidate), env, qi)
        .risk;
}

double n_reward(const ConfigurationId& candidate,
                const std::vector<ConfigurationId>& reference_set,
                const EffectivenessMatrix& matrix, const std::vector<QueryId>& queries) {
    auto qi = query_indices(matrix, queries);
    auto env = envelope_row(reference_set, matrix, qi);
    return accumulate(Objective::query_count, matrix, matrix.config_index(candidate), env, qi)
        .reward;
}

GainBreakdown gain(const ConfigurationId& candidate,
                   const std::vector<ConfigurationId>& reference_set,
                   const EffectivenessMatrix& matrix, const std::vector<QueryId>& queries,
                   const RiskParams& params) {
    auto qi = query_indices(matrix, queries);
    auto env = envelope_row(reference_set, matrix, qi);
    RiskReward rr =
        accumulate(params.objective, matrix, matrix.config_index(candidate), env, qi);
    return breakdown_for(candidate, rr, params.beta);
}

ConfigurationId get_best_rsc(const std::vector<QueryId>& queries,
                             const std::vector<ConfigurationId>& pool,
                             const EffectivenessMatrix& matrix, const RiskParams& params,
                             const std::vector<ConfigurationId>& reference_set) {
    auto qi = query_indices(matrix, queries);
    auto env = envelope_row(reference_set, matrix, qi);
    return best_candidate(pool, matrix, params, env, qi, nullptr);
}

SelectedPool select_configurations(const std::vector<QueryId>& queries,
                                   const std::vector<ConfigurationId>& pool,
                                   const EffectivenessMatrix& matrix, const RiskParams& params) {
    if (params.k < 1) {
        throw contract_error("selection size K must be >= 1");
    }
    if (params.k > static_cast<int>(pool.size())) {
        throw contract_error("selection size K=" + std::to_string(params.k) +
                             " exceeds pool size " + std::to_string(pool.size()));
    }
    if (!matrix.has_config(params.baseline_id)) {
        throw contract_error("baseline configuration " + params.baseline_id +
                             " is not in the matrix");
    }
    if (params.beta < 0.0) {
        throw contract_error("beta must be >= 0");
    }
    auto qi = query_indices(matrix, queries);

    SelectedPool result;
    result.objective = params.objective;
    result.beta = params.beta;
    result.baseline_id = params.baseline_id;
    result.metric_name = matrix.metric_name();

    std::vector<ConfigurationId> remaining = pool;
    // Step 1 scores the pool against {baseline}; from then on the envelope
    // covers exactly the selected set (the baseline stays in it only by
    // being selected itself).
    std::vector<double> env =
        envelope_row(std::vector<ConfigurationId>{params.baseline_id}, matrix, qi);

    for (int step = 0; step < params.k; ++step) {
        GainBreakdown winner;
        best_candidate(remaining, matrix, params, env, qi, &winner);
        remaining.erase(std::find(remaining.begin(), remaining.end(), winner.config_id));

        const std::size_t c = matrix.config_index(winner.config_id);
        double env_sum = 0.0;
        for (std::size_t i = 0; i < qi.size(); ++i) {
            const double s = matrix.score_at(c, qi[i]);
            env[i] = step == 0 ? s : std::max(env[i], s);
            env_sum += env[i];
        }

        SelectionStep s;
        s.config_id = winner.config_id;
        s.risk = winner.risk;
        s.reward = winner.reward;
        s.gain = winner.gain;
        s.envelope_mean_after = env_sum / static_cast<double>(qi.size());
        result.steps.push_back(std::move(s));
    }
    return result;
}

}  // namespace sqp
