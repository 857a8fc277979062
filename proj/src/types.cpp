#include "sqp/types.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <mutex>
#include <sstream>

namespace sqp {

namespace {

std::mutex& handler_mutex() {
    static std::mutex m;
    return m;
}

warning_handler& handler_slot() {
    static warning_handler h;
    return h;
}

}  // namespace

warning_handler set_warning_handler(warning_handler handler) {
    std::lock_guard<std::mutex> lock(handler_mutex());
    warning_handler previous = handler_slot();
    handler_slot() = std::move(handler);
    return previous;
}

void warn(const std::string& message) {
    warning_handler h;
    {
        std::lock_guard<std::mutex> lock(handler_mutex());
        h = handler_slot();
    }
    if (h) {
        h(message);
    } else {
        std::cerr << "sqp: warning: " << message << '\n';
    }
}

void ConfigurationDescriptor::validate() const {
    if (config_id.empty()) {
        throw io_error("descriptor with empty config_id");
    }
    if (retrieval_model.empty() || qe_model.empty()) {
        throw io_error("descriptor " + config_id + ": empty component field");
    }
    const bool any = qe_docs || qe_terms || qe_min_docs;
    if (!uses_expansion()) {
        if (any) {
            throw io_error("descriptor " + config_id +
                           ": qe_model is \"No\" but expansion hyperparameters are set");
        }
        return;
    }
    if (!qe_docs || !qe_terms || !qe_min_docs) {
        throw io_error("descriptor " + config_id +
                       ": qe_model " + qe_model + " requires qe_docs, qe_terms and qe_min_docs");
    }
    if (*qe_docs <= 0 || *qe_terms <= 0 || *qe_min_docs <= 0) {
        throw io_error("descriptor " + config_id + ": expansion hyperparameters must be positive");
    }
}

void Qrels::add(const QueryId& query_id, const std::string& doc_id, int grade_value) {
    if (query_id.empty() || doc_id.empty()) {
        throw io_error("qrels judgment with empty query or document id");
    }
    auto it = by_query_.find(query_id);
    if (it == by_query_.end()) {
        order_.push_back(query_id);
        it = by_query_.emplace(query_id, PerQuery{}).first;
    }
    PerQuery& q = it->second;
    if (!q.grades.emplace(doc_id, grade_value).second) {
        throw io_error("duplicate judgment for (" + query_id + ", " + doc_id + ")");
    }
    q.order.emplace_back(doc_id, grade_value);
    if (grade_value > 0) {
        ++q.relevant;
    }
    ++total_;
}

bool Qrels::is_judged(const QueryId& query_id, const std::string& doc_id) const {
    auto it = by_query_.find(query_id);
    return it != by_query_.end() && it->second.grades.count(doc_id) > 0;
}

std::optional<int> Qrels::grade(const QueryId& query_id, const std::string& doc_id) const {
    auto it = by_query_.find(query_id);
    if (it == by_query_.end()) {
        return std::nullopt;
    }
    auto git = it->second.grades.find(doc_id);
    if (git == it->second.grades.end()) {
        return std::nullopt;
    }
    return git->second;
}

bool Qrels::is_relevant(const QueryId& query_id, const std::string& doc_id) const {
    auto g = grade(query_id, doc_id);
    return g && *g > 0;
}

int Qrels::relevant_count(const QueryId& query_id) const {
    auto it = by_query_.find(query_id);
    return it == by_query_.end() ? 0 : it->second.relevant;
}

std::vector<int> Qrels::grades_sorted_desc(const QueryId& query_id) const {
    std::vector<int> grades;
    auto it = by_query_.find(query_id);
    if (it == by_query_.end()) {
        return grades;
    }
    grades.reserve(it->second.order.size());
    for (const auto& [doc, g] : it->second.order) {
        grades.push_back(g);
    }
    std::sort(grades.begin(), grades.end(), std::greater<int>());
    return grades;
}

const std::vector<std::pair<std::string, int>>& Qrels::judgments(const QueryId& query_id) const {
    static const std::vector<std::pair<std::string, int>> empty;
    auto it = by_query_.find(query_id);
    return it == by_query_.end() ? empty : it->second.order;
}

bool same_schema(const QueryFeatureVector& a, const QueryFeatureVector& b) {
    return a.names == b.names;
}

EffectivenessMatrix::EffectivenessMatrix(std::string metric_name)
    : metric_name_(std::move(metric_name)) {}

void EffectivenessMatrix::add_cell(const ConfigurationId& config_id, const QueryId& query_id,
                                   double score) {
    if (finalized_) {
        throw contract_error("cannot add cells to a finalized matrix");
    }
    if (config_id.empty() || query_id.empty()) {
        throw io_error("matrix cell with empty config or query id");
    }
    if (!(score >= 0.0 && score <= 1.0)) {
        std::ostringstream os;
        os << "score " << score << " for (" << config_id << ", " << query_id
           << ") outside [0, 1]";
        throw io_error(os.str());
    }
    auto cit = config_idx_.find(config_id);
    if (cit == config_idx_.end()) {
        cit = config_idx_.emplace(config_id, configs_.size()).first;
        configs_.push_back(config_id);
        rows_.emplace_back(queries_.size(), std::nan(""));
    }
    auto qit = query_idx_.find(query_id);
    if (qit == query_idx_.end()) {
        qit = query_idx_.emplace(query_id, queries_.size()).first;
        queries_.push_back(query_id);
        for (auto& row : rows_) {
            row.push_back(std::nan(""));
        }
    }
    double& cell = rows_[cit->second][qit->second];
    if (!std::isnan(cell)) {
        throw io_error("duplicate cell (" + config_id + ", " + query_id + ")");
    }
    cell = score;
}

void EffectivenessMatrix::finalize() {
    if (configs_.empty() || queries_.empty()) {
        throw io_error("no cells");
    }
    std::ostringstream missing;
    int gaps = 0;
    for (std::size_t c = 0; c < configs_.size(); ++c) {
        for (std::size_t q = 0; q < queries_.size(); ++q) {
            if (std::isnan(rows_[c][q])) {
                if (gaps < 20) {
                    missing << (gaps ? ", " : "") << "(" << configs_[c] << ", " << queries_[q]
                            << ")";
                }
                ++gaps;
            }
        }
    }
    if (gaps > 0) {
        std::ostringstream os;
        os << gaps << " missing cell(s): " << missing.str();
        if (gaps > 20) {
            os << ", ...";
        }
        throw io_error(os.str());
    }
    finalized_ = true;
}

double EffectivenessMatrix::score(const ConfigurationId& config_id,
                                  const QueryId& query_id) const {
    return score_at(config_index(config_id), query_index(query_id));
}

double EffectivenessMatrix::score_at(std::size_t config_idx, std::size_t query_idx) const {
    if (config_idx >= configs_.size() || query_idx >= queries_.size()) {
        throw contract_error("matrix index out of range");
    }
    if (observer_) {
        observer_(config_idx, query_idx);
    }
    return rows_[config_idx][query_idx];
}

bool EffectivenessMatrix::has_config(const ConfigurationId& id) const {
    return config_idx_.count(id) > 0;
}

bool EffectivenessMatrix::has_query(const QueryId& id) const {
    return query_idx_.count(id) > 0;
}

std::size_t EffectivenessMatrix::config_index(const ConfigurationId& id) const {
    auto it = config_idx_.find(id);
    if (it == config_idx_.end()) {
        throw contract_error("unknown configuration id: " + id);
    }
    return it->second;
}

std::size_t EffectivenessMatrix::query_index(const QueryId& id) const {
    auto it = query_idx_.find(id);
    if (it == query_idx_.end()) {
        throw contract_error("unknown query id: " + id);
    }
    return it->second;
}

void EffectivenessMatrix::set_access_observer(
    std::function<void(std::size_t, std::size_t)> observer) {
    observer_ = std::move(observer);
}

}  // namespace sqp
