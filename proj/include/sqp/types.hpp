#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <vector>

namespace sqp {

/// Malformed or inconsistent input data (files, records). CLI exit code 2.
class io_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A violated precondition or API contract. CLI exit code 3.
class contract_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-fatal diagnostics (degenerate inputs, repaired records) go through a
/// process-wide handler. The default writes "sqp: warning: ..." to stderr.
using warning_handler = std::function<void(const std::string&)>;

/// Installs a new handler and returns the previous one. Pass nullptr to
/// restore the default.
warning_handler set_warning_handler(warning_handler handler);
void warn(const std::string& message);

using ConfigurationId = std::string;
using QueryId = std::string;

/// One complete setting of retrieval components and hyperparameters.
/// qe_model "No" means no query expansion; the three expansion
/// hyperparameters must then be absent, otherwise all present and positive.
struct ConfigurationDescriptor {
    ConfigurationId config_id;
    std::string retrieval_model;
    std::string qe_model;
    std::optional<int> qe_docs;
    std::optional<int> qe_terms;
    std::optional<int> qe_min_docs;

    bool uses_expansion() const { return qe_model != "No"; }
    void validate() const;
};

struct RunEntry {
    std::string doc_id;
    int rank = 0;
    double score = 0.0;
};

/// Ranked retrieval output for one query. After loading, entries are sorted
/// by (score desc, doc_id asc) with ranks rewritten 1..n.
struct RunList {
    QueryId query_id;
    std::vector<RunEntry> entries;
    std::string tag;
};

/// Relevance judgments. Grades are kept as given (negatives included); a
/// document counts as relevant iff its grade is > 0.
class Qrels {
public:
    /// Throws io_error if the (query, doc) pair was already judged.
    void add(const QueryId& query_id, const std::string& doc_id, int grade);

    bool is_judged(const QueryId& query_id, const std::string& doc_id) const;
    /// Grade of a judged pair, or nullopt when unjudged.
    std::optional<int> grade(const QueryId& query_id, const std::string& doc_id) const;
    bool is_relevant(const QueryId& query_id, const std::string& doc_id) const;

    /// Number of relevant (grade > 0) documents judged for the query.
    int relevant_count(const QueryId& query_id) const;
    /// Grades of the query's judged documents, sorted descending.
    std::vector<int> grades_sorted_desc(const QueryId& query_id) const;

    /// Queries in first-appearance order.
    const std::vector<QueryId>& queries() const { return order_; }
    std::size_t size() const { return total_; }

    /// Judged (doc, grade) pairs for one query in first-appearance order.
    const std::vector<std::pair<std::string, int>>& judgments(const QueryId& query_id) const;

private:
    struct PerQuery {
        std::unordered_map<std::string, int> grades;
        std::vector<std::pair<std::string, int>> order;
        int relevant = 0;
    };
    std::unordered_map<QueryId, PerQuery> by_query_;
    std::vector<QueryId> order_;
    std::size_t total_ = 0;
};

/// One (query, doc, feature) measurement from the raw features file.
struct FeatureRecord {
    QueryId query_id;
    std::string doc_id;
    std::string feature_name;
    double value = 0.0;
};

/// Aggregated per-query feature representation used for cosine matching.
/// All vectors of a dataset share the same ordered name schema.
struct QueryFeatureVector {
    QueryId query_id;
    std::vector<std::string> names;
    std::vector<double> values;
};

bool same_schema(const QueryFeatureVector& a, const QueryFeatureVector& b);

/// Dense per-(configuration, query) effectiveness scores in [0, 1].
/// Row/column order is first-appearance order of ids during construction.
/// Immutable after finalize(); safe for concurrent reads.
class EffectivenessMatrix {
public:
    explicit EffectivenessMatrix(std::string metric_name = "unknown");

    /// Throws io_error on a duplicate cell or a score outside [0, 1].
    void add_cell(const ConfigurationId& config_id, const QueryId& query_id, double score);
    /// Density check; throws io_error listing every missing (config, query).
    void finalize();
    bool finalized() const { return finalized_; }

    double score(const ConfigurationId& config_id, const QueryId& query_id) const;
    double score_at(std::size_t config_idx, std::size_t query_idx) const;

    const std::vector<ConfigurationId>& configs() const { return configs_; }
    const std::vector<QueryId>& queries() const { return queries_; }
    bool has_config(const ConfigurationId& id) const;
    bool has_query(const QueryId& id) const;
    /// Throws contract_error when the id is unknown.
    std::size_t config_index(const ConfigurationId& id) const;
    std::size_t query_index(const QueryId& id) const;

    const std::string& metric_name() const { return metric_name_; }
    void set_metric_name(std::string name) { metric_name_ = std::move(name); }

    /// Audit hook: called with (config_idx, query_idx) on every cell read.
    /// Used by tests to trace train/test protocol isolation.
    void set_access_observer(std::function<void(std::size_t, std::size_t)> observer);

private:
    std::string metric_name_;
    std::vector<ConfigurationId> configs_;
    std::vector<QueryId> queries_;
    std::unordered_map<ConfigurationId, std::size_t> config_idx_;
    std::unordered_map<QueryId, std::size_t> query_idx_;
    std::vector<std::vector<double>> rows_;  // config-major, NaN = unpopulated
    bool finalized_ = false;
    std::function<void(std::size_t, std::size_t)> observer_;
};

}  // namespace sqp
