#pragma once

#include <string>
#include <vector>

#include "sqp/types.hpp"

namespace sqp {

/// Which quantity the risk/reward pair accumulates: per-query effectiveness
/// mass (E) or the count of strictly affected queries (N).
enum class Objective { effectiveness, query_count };

char objective_code(Objective objective);                 // 'e' / 'n'
Objective parse_objective(const std::string& text);       // "e" / "n"

struct RiskParams {
    Objective objective = Objective::effectiveness;
    double beta = 0.0;  // risk weight is (1 + beta)
    int k = 1;          // configurations to select
    ConfigurationId baseline_id;
};

struct GainBreakdown {
    ConfigurationId config_id;
    double risk = 0.0;
    double reward = 0.0;
    double gain = 0.0;  // reward - (1 + beta) * risk
};

struct SelectionStep {
    ConfigurationId config_id;
    double risk = 0.0;
    double reward = 0.0;
    double gain = 0.0;
    double envelope_mean_after = 0.0;
};

/// Ordered result of the greedy risk-sensitive selection with a per-step
/// gain audit. envelope_mean_after is non-decreasing across steps.
struct SelectedPool {
    Objective objective = Objective::effectiveness;
    double beta = 0.0;
    ConfigurationId baseline_id;
    std::string metric_name;
    std::vector<SelectionStep> steps;

    std::vector<ConfigurationId> config_ids() const;

    std::string to_json_string() const;
    static SelectedPool from_json_string(const std::string& text);
};

/// Best effectiveness over the reference set for one query. Errors on an
/// empty set.
double envelope(const std::vector<ConfigurationId>& reference_set, const QueryId& query,
                const EffectivenessMatrix& matrix);

/// Mean over the queries of max(0, envelope(S, q) - p(c, q)).
double e_risk(const ConfigurationId& candidate, const std::vector<ConfigurationId>& reference_set,
              const EffectivenessMatrix& matrix, const std::vector<QueryId>& queries);

/// Mean over the queries of max(0, p(c, q) - envelope(S, q)).
double e_reward(const ConfigurationId& candidate,
                const std::vector<ConfigurationId>& reference_set,
                const EffectivenessMatrix& matrix, const std::vector<QueryId>& queries);

/// Fraction of queries with envelope(S, q) strictly above p(c, q).
double n_risk(const ConfigurationId& candidate, const std::vector<ConfigurationId>& reference_set,
              const EffectivenessMatrix& matrix, const std::vector<QueryId>& queries);

/// Fraction of queries with p(c, q) strictly above envelope(S, q).
double n_reward(const ConfigurationId& candidate,
                const std::vector<ConfigurationId>& reference_set,
                const EffectivenessMatrix& matrix, const std::vector<QueryId>& queries);

/// Risk/reward/gain of a candidate against the reference set under the
/// objective in params.
GainBreakdown gain(const ConfigurationId& candidate,
                   const std::vector<ConfigurationId>& reference_set,
                   const EffectivenessMatrix& matrix, const std::vector<QueryId>& queries,
                   const RiskParams& params);

/// Candidate with the maximal gain against the reference set; ties go to
/// the lexicographically smallest configuration id.
ConfigurationId get_best_rsc(const std::vector<QueryId>& queries,
                             const std::vector<ConfigurationId>& pool,
                             const EffectivenessMatrix& matrix, const RiskParams& params,
                             const std::vector<ConfigurationId>& reference_set);

/// Greedy selection of params.k configurations. The first step scores the
/// pool against {baseline} alone; each later step scores the shrinking pool
/// against the configurations selected so far. The baseline itself is only
/// selectable when it is a pool member.
SelectedPool select_configurations(const std::vector<QueryId>& queries,
                                   const std::vector<ConfigurationId>& pool,
                                   const EffectivenessMatrix& matrix, const RiskParams& params);

}  // namespace sqp
