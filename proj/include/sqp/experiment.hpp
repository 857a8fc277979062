#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "sqp/folds.hpp"
#include "sqp/risk.hpp"
#include "sqp/types.hpp"

namespace sqp {

/// Experiment method roster. Tokens accepted in method lists:
///   best_trained     best mean-effectiveness training config on every test query
///   erisk_cosine     effectiveness-objective risk pool + cosine routing
///   nrisk_cosine     query-count-objective risk pool + cosine routing
///   risk_cosine      risk pool with the experiment's --objective + cosine routing
///   randomk_cosine   random K pool + cosine routing
///   oracle           per-query best over the full configuration set
///   oracle_k         per-query best over the risk-selected K pool
///   oracle_randomk   per-query best over the random K pool
struct ExperimentOptions {
    std::vector<std::string> methods;
    int draws = 3;
    std::uint64_t seed = 42;
    int k = 20;
    Objective objective = Objective::effectiveness;
    double beta = 0.0;
    bool zscore = false;
    int match_depth = 10;                // feature aggregation depth
    std::vector<std::string> sig_refs;   // default: first method
    /// Test hook, called as (draw, direction, phase) with phase "select"
    /// (training-side work) or "score" (test-side evaluation).
    std::function<void(int, int, const std::string&)> phase_hook;
};

struct SignificanceMark {
    std::string reference;
    double t = 0.0;
    double p_raw = 1.0;
    double p_corrected = 1.0;
    bool significant = false;  // corrected p < 0.05
};

struct MethodReport {
    std::string name;
    std::vector<double> measurements;  // draw-major, direction-minor
    double mean = 0.0;
    double sd = 0.0;                   // sample sd over the measurements
    double first_split = 0.0;          // draw 0, direction 0
    std::vector<double> per_query;     // mean test score per query, over draws
    std::vector<SignificanceMark> significance;
    int improved = 0;                  // vs the first reference, strict
    int degraded = 0;
};

struct ExperimentReport {
    std::string metric_name;
    std::uint64_t seed = 0;
    int draws = 0;
    int k = 0;
    Objective objective = Objective::effectiveness;
    double beta = 0.0;
    std::vector<QueryId> queries;  // canonical (sorted) order
    std::vector<std::string> sig_refs;
    std::vector<MethodReport> methods;

    const MethodReport& method(const std::string& name) const;

    std::string to_tsv() const;
    std::string to_markdown() const;
};

/// Runs the 2-fold x draws protocol: per (draw, direction) each method
/// selects/trains on the train half and is scored on the matrix over the
/// test half; the same fold plan serves every method. Feature vectors are
/// required only by the cosine-routing methods.
ExperimentReport run_experiment(const EffectivenessMatrix& matrix,
                                const std::vector<QueryFeatureVector>& features,
                                const ExperimentOptions& options);

}  // namespace sqp
