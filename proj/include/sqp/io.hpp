#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "sqp/types.hpp"

namespace sqp {

/// Shortest decimal form that parses back to the same double.
std::string format_double(double value);

// Long-format matrix TSV: config_id<TAB>query_id<TAB>score, one cell per
// line, '#'-prefixed comments ignored. save_matrix writes the canonical
// form: a "# metric: ..." header then cells in matrix (config-major) order.
EffectivenessMatrix load_matrix(const std::filesystem::path& path);
void save_matrix(const EffectivenessMatrix& matrix, const std::filesystem::path& path);

// TREC 6-column run format: qid Q0 docid rank score tag. On load, entries
// are re-sorted by (score desc, doc_id asc) and ranks rewritten 1..n; a
// warning is emitted when that repairs the input ordering.
std::vector<RunList> load_runs(const std::filesystem::path& path);
void save_runs(const std::vector<RunList>& runs, const std::filesystem::path& path);

// TREC qrels format: qid 0 docid grade. Negative grades are preserved.
Qrels load_qrels(const std::filesystem::path& path);
void save_qrels(const Qrels& qrels, const std::filesystem::path& path);

// Features TSV: query_id<TAB>doc_id<TAB>feature_name<TAB>value.
std::vector<FeatureRecord> load_features(const std::filesystem::path& path);
void save_features(const std::vector<FeatureRecord>& records,
                   const std::filesystem::path& path);

// Descriptor TSV: config_id, retrieval_model, qe_model, qe_docs, qe_terms,
// qe_min_docs; '-' marks an absent hyperparameter.
std::vector<ConfigurationDescriptor> load_descriptors(const std::filesystem::path& path);
void save_descriptors(const std::vector<ConfigurationDescriptor>& descriptors,
                      const std::filesystem::path& path);

}  // namespace sqp
