#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "sqp/types.hpp"

namespace sqp {

/// Configuration with the highest mean effectiveness over the training
/// queries; ties go to the smallest id.
ConfigurationId best_trained(const EffectivenessMatrix& matrix,
                             const std::vector<QueryId>& train_queries);

/// k distinct configurations drawn uniformly without replacement. The draw
/// is a partial Fisher-Yates over the lexicographically sorted pool, so it
/// depends only on (pool contents, k, seed).
std::vector<ConfigurationId> random_k(const std::vector<ConfigurationId>& pool, int k,
                                      std::uint64_t seed);

struct OracleResult {
    std::vector<std::pair<QueryId, ConfigurationId>> per_query;  // query order as given
    double mean = 0.0;  // mean of the per-query maxima (the envelope mean)
};

/// Perfect per-query chooser over `subset`: for each query the best member
/// (ties to the smallest id) and the mean of the per-query maxima.
OracleResult oracle(const EffectivenessMatrix& matrix, const std::vector<ConfigurationId>& subset,
                    const std::vector<QueryId>& queries);

enum class FusionNorm { minmax, none };

FusionNorm parse_fusion_norm(const std::string& text);

struct FusedEntry {
    std::string doc_id;
    double score = 0.0;
};

/// Result of score fusion for one query; entries sorted by
/// (score desc, doc_id asc).
struct FusedRun {
    QueryId query_id;
    std::vector<FusedEntry> entries;
    std::vector<std::string> source_tags;
    std::string normalization;
};

/// CombSUM: per input run, optionally min-max normalize scores to [0, 1],
/// then sum each document's scores across runs (absent = 0). A run whose
/// scores are all equal normalizes to all-1 under minmax, with a warning.
FusedRun comb_sum(const std::vector<RunList>& runs, FusionNorm normalization);

/// Fused result as a standard run list (tag "combsum" by default).
RunList to_run_list(const FusedRun& fused, const std::string& tag = "combsum");

/// Selective-query-expansion pair: the best-trained configuration plus its
/// expansion/no-expansion counterpart. The counterpart is the best-trained
/// config of the opposite expansion class among those sharing the retrieval
/// model, else the best-trained of the opposite class overall. Errors when
/// the descriptor pool is entirely one class.
std::pair<ConfigurationId, ConfigurationId> trained_sqe(
    const std::vector<ConfigurationDescriptor>& descriptors, const EffectivenessMatrix& matrix,
    const std::vector<QueryId>& train_queries);

}  // namespace sqp
