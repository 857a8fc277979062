#pragma once

#include <span>
#include <string>
#include <vector>

#include "sqp/risk.hpp"
#include "sqp/types.hpp"

namespace sqp {

enum class Aggregator { mean, std_dev, max };

/// mean / std / max, the default summary triple.
const std::vector<Aggregator>& default_aggregators();

std::string aggregator_suffix(Aggregator aggregator);

/// Collapses the per-document feature records of one query into a single
/// vector: for each feature name (first-appearance order), one value per
/// aggregator over the first `depth` documents (document order = record
/// order, i.e. the reference run's ranking). Standard deviation is the
/// population form. Fewer than `depth` documents aggregate over what
/// exists; a feature missing for some document is an error.
QueryFeatureVector aggregate_features(std::span<const FeatureRecord> records, int depth,
                                      const std::vector<Aggregator>& aggregators =
                                          default_aggregators());

/// Groups a raw record stream by query (first-appearance order) and
/// aggregates each group.
std::vector<QueryFeatureVector> aggregate_all(const std::vector<FeatureRecord>& records,
                                              int depth,
                                              const std::vector<Aggregator>& aggregators =
                                                  default_aggregators());

/// dot(u, v) / (|u| |v|); schemas must match. A zero-norm side yields 0
/// with a warning (no match preference).
double cosine(const QueryFeatureVector& u, const QueryFeatureVector& v);

/// The training-query -> best-pool-configuration map. pool_tag records
/// which selection produced the pool (objective, beta, baseline).
struct QueryConfigIndex {
    std::vector<std::pair<QueryId, ConfigurationId>> entries;  // query id order
    std::string pool_tag;
    std::string metric_name;

    const ConfigurationId& at(const QueryId& query_id) const;
};

/// For each training query, the pool member with the highest matrix score;
/// ties go to the lexicographically smallest configuration id.
QueryConfigIndex build_best_config_index(const std::vector<QueryId>& train_queries,
                                         const SelectedPool& pool,
                                         const EffectivenessMatrix& matrix);

/// Everything needed to route an unseen query: training vectors, the
/// query->configuration index, the selected pool, and the z-score transform
/// when one was fitted.
struct TrainedModel {
    std::vector<std::string> schema;
    std::vector<QueryFeatureVector> training_vectors;  // sorted by query id
    QueryConfigIndex index;
    SelectedPool pool;
    std::string feature_source;  // tag of the run the features came from
    int aggregation_depth = 10;
    bool zscore = false;
    std::vector<double> zscore_mean;
    std::vector<double> zscore_sd;

    /// Applies the stored z-score transform (identity when disabled).
    QueryFeatureVector transform(const QueryFeatureVector& vector) const;

    std::string to_json_string() const;
    static TrainedModel from_json_string(const std::string& text);
};

/// Builds the model: indexes the best pool configuration per training query
/// and stores that query's (optionally z-scored) feature vector.
TrainedModel train_model(const std::vector<QueryId>& train_queries, const SelectedPool& pool,
                         const EffectivenessMatrix& matrix,
                         const std::vector<QueryFeatureVector>& features, bool zscore,
                         const std::string& feature_source, int aggregation_depth);

struct MatchResult {
    ConfigurationId config_id;
    QueryId matched_query;
    double similarity = 0.0;
};

/// Routes a test query to the configuration of its most cosine-similar
/// training query; ties go to the lexicographically smallest query id.
MatchResult best_match_configuration(const TrainedModel& model,
                                     const QueryFeatureVector& test_features);

}  // namespace sqp
