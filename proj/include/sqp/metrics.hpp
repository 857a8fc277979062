#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sqp/types.hpp"

namespace sqp {

/// Parsed metric specification. CLI grammar: p@10, ap, ndcg@10, rr,
/// rbp:0.5:1000 (rbp:0.5 leaves the depth at its default: run length
/// capped at 1000).
struct MetricSpec {
    enum class Kind { precision, average_precision, ndcg, reciprocal_rank, rbp };

    Kind kind = Kind::average_precision;
    int k = 0;                   // cutoff for p@k / ndcg@k
    double persistence = 0.0;    // rbp only, in (0, 1)
    std::optional<int> depth;    // rbp evaluation depth

    static MetricSpec parse(const std::string& text);
    std::string to_string() const;
};

/// Fraction of the top k ranks holding a relevant document; ranks past the
/// end of the run count as non-relevant.
double precision_at_k(const RunList& run, const Qrels& qrels, int k);

/// Mean over the query's relevant documents of precision at their retrieved
/// ranks; unretrieved relevant documents contribute 0. A query with no
/// relevant document scores 0 with a warning.
double average_precision(const RunList& run, const Qrels& qrels);

/// DCG@k / IDCG@k with gain 2^grade - 1 (grade > 0, else 0) and discount
/// 1/log2(rank + 1); the ideal ranking comes from the qrels sorted by grade
/// descending.
double ndcg_at_k(const RunList& run, const Qrels& qrels, int k);

/// 1/rank of the first relevant retrieved document, 0 when none is.
double reciprocal_rank(const RunList& run, const Qrels& qrels);

struct RbpScore {
    double base = 0.0;
    double residual = 0.0;
};

/// Rank-biased precision with persistence p evaluated to depth d, plus the
/// residual mass attributable to unjudged ranks (including ranks past the
/// run's end). base + residual <= 1 always holds.
RbpScore rbp(const RunList& run, const Qrels& qrels, double persistence, int depth);

/// Effective RBP depth for a run when the spec leaves it unset.
int default_rbp_depth(const RunList& run);

double evaluate_metric(const MetricSpec& spec, const RunList& run, const Qrels& qrels);

struct RbpResidualEntry {
    ConfigurationId config_id;
    QueryId query_id;
    double base = 0.0;
    double residual = 0.0;
};

/// Scores every (configuration, query) cell with the given metric. The
/// matrix queries are the qrels queries in first-appearance order; every
/// configuration must supply a run for each of them. For RBP the base goes
/// into the matrix and residuals are collected into `residuals` when given.
EffectivenessMatrix build_matrix(
    const std::map<ConfigurationId, std::vector<RunList>>& runs_by_config, const Qrels& qrels,
    const MetricSpec& spec, std::vector<RbpResidualEntry>* residuals = nullptr);

}  // namespace sqp
