#include "sqp/matcher.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <unordered_map>

#include <nlohmann/json.hpp>

#include "sqp/io.hpp"

namespace sqp {

namespace {

using ordered_json = nlohmann::ordered_json;

}  // namespace

const std::vector<Aggregator>& default_aggregators() {
    static const std::vector<Aggregator> triple{Aggregator::mean, Aggregator::std_dev,
                                                Aggregator::max};
    return triple;
}

std::string aggregator_suffix(Aggregator aggregator) {
    switch (aggregator) {
        case Aggregator::mean:
            return "mean";
        case Aggregator::std_dev:
            return "std";
        case Aggregator::max:
            return "max";
    }
    throw contract_error("unhandled aggregator");
}

QueryFeatureVector aggregate_features(std::span<const FeatureRecord> records, int depth,
                                      const std::vector<Aggregator>& aggregators) {
    if (records.empty()) {
        throw contract_error("aggregate_features needs at least one record");
    }
    if (depth < 1) {
        throw contract_error("aggregation depth must be >= 1");
    }
    if (aggregators.empty()) {
        throw contract_error("aggregate_features needs at least one aggregator");
    }
    const QueryId& query_id = records.front().query_id;

    std::vector<std::string> docs;           // first-appearance order = rank order
    std::vector<std::string> feature_names;  // first-appearance order
    std::unordered_map<std::string, std::size_t> doc_idx;
    std::unordered_map<std::string, std::size_t> feature_idx;
    for (const FeatureRecord& record : records) {
        if (record.query_id != query_id) {
            throw contract_error("aggregate_features given records for more than one query (" +
                                 query_id + " and " + record.query_id + ")");
        }
        if (doc_idx.emplace(record.doc_id, docs.size()).second) {
            docs.push_back(record.doc_id);
        }
        if (feature_idx.emplace(record.feature_name, feature_names.size()).second) {
            feature_names.push_back(record.feature_name);
        }
    }
    const std::size_t n_docs = std::min<std::size_t>(docs.size(), static_cast<std::size_t>(depth));

    // values[f][d], NaN marking a hole (ragged input).
    std::vector<std::vector<double>> values(
        feature_names.size(), std::vector<double>(docs.size(), std::nan("")));
    for (const FeatureRecord& record : records) {
        values[feature_idx[record.feature_name]][doc_idx[record.doc_id]] = record.value;
    }

    QueryFeatureVector out;
    out.query_id = query_id;
    for (std::size_t f = 0; f < feature_names.size(); ++f) {
        double sum = 0.0;
        double max_value = -std::numeric_limits<double>::infinity();
        for (std::size_t d = 0; d < n_docs; ++d) {
            const double v = values[f][d];
            if (std::isnan(v)) {
                throw contract_error("query " + query_id + ": feature " + feature_names[f] +
                                     " missing for document " + docs[d]);
            }
            sum += v;
            max_value = std::max(max_value, v);
        }
        const double mean = sum / static_cast<double>(n_docs);
        double variance = 0.0;
        for (std::size_t d = 0; d < n_docs; ++d) {
            const double diff = values[f][d] - mean;
            variance += diff * diff;
        }
        variance /= static_cast<double>(n_docs);
        for (Aggregator aggregator : aggregators) {
            out.names.push_back(feature_names[f] + "." + aggregator_suffix(aggregator));
            switch (aggregator) {
                case Aggregator::mean:
                    out.values.push_back(mean);
                    break;
                case Aggregator::std_dev:
                    out.values.push_back(std::sqrt(variance));
                    break;
                case Aggregator::max:
                    out.values.push_back(max_value);
                    break;
            }
        }
    }
    for (double v : out.values) {
        if (!std::isfinite(v)) {
            throw contract_error("query " + query_id + ": non-finite aggregated feature value");
        }
    }
    return out;
}

std::vector<QueryFeatureVector> aggregate_all(const std::vector<FeatureRecord>& records,
                                              int depth,
                                              const std::vector<Aggregator>& aggregators) {
    std::vector<QueryId> order;
    std::unordered_map<QueryId, std::vector<FeatureRecord>> by_query;
    for (const FeatureRecord& record : records) {
        auto [it, inserted] = by_query.try_emplace(record.query_id);
        if (inserted) {
            order.push_back(record.query_id);
        }
        it->second.push_back(record);
    }
    std::vector<QueryFeatureVector> vectors;
    vectors.reserve(order.size());
    for (const QueryId& qid : order) {
        vectors.push_back(aggregate_features(by_query[qid], depth, aggregators));
    }
    // Schema consistency across the dataset.
    for (std::size_t i = 1; i < vectors.size(); ++i) {
        if (!same_schema(vectors[0], vectors[i])) {
            throw contract_error("feature schema of query " + vectors[i].query_id +
                                 " differs from query " + vectors[0].query_id);
        }
    }
    return vectors;
}

double cosine(const QueryFeatureVector& u, const QueryFeatureVector& v) {
    if (!same_schema(u, v)) {
        throw contract_error("cosine over mismatched feature schemas (" + u.query_id + " vs " +
                             v.query_id + ")");
    }
    if (u.values.size() != v.values.size()) {
        throw contract_error("cosine over mismatched dimensions");
    }
    double dot = 0.0;
    double norm_u = 0.0;
    double norm_v = 0.0;
    for (std::size_t i = 0; i < u.values.size(); ++i) {
        dot += u.values[i] * v.values[i];
        norm_u += u.values[i] * u.values[i];
        norm_v += v.values[i] * v.values[i];
    }
    if (norm_u == 0.0 || norm_v == 0.0) {
        warn("cosine of a zero-norm feature vector (" + u.query_id + " vs " + v.query_id +
             "); similarity 0");
        return 0.0;
    }
    return dot / (std::sqrt(norm_u) * std::sqrt(norm_v));
}

const ConfigurationId& QueryConfigIndex::at(const QueryId& query_id) const {
    for (const auto& [qid, cid] : entries) {
        if (qid == query_id) {
            return cid;
        }
    }
    throw contract_error("query " + query_id + " not in the query-configuration index");
}

QueryConfigIndex build_best_config_index(const std::vector<QueryId>& train_queries,
                                         const SelectedPool& pool,
                                         const EffectivenessMatrix& matrix) {
    if (pool.steps.empty()) {
        throw contract_error("cannot index against an empty selected pool");
    }
    std::vector<ConfigurationId> members = pool.config_ids();
    std::sort(members.begin(), members.end());

    QueryConfigIndex index;
    index.pool_tag = std::string(1, objective_code(pool.objective)) + ":beta=" +
                     format_double(pool.beta) + ":baseline=" + pool.baseline_id;
    index.metric_name = matrix.metric_name();
    std::vector<QueryId> sorted_queries = train_queries;
    std::sort(sorted_queries.begin(), sorted_queries.end());
    for (const QueryId& qid : sorted_queries) {
        const std::size_t q = matrix.query_index(qid);
        const ConfigurationId* best = nullptr;
        double best_score = -1.0;
        for (const ConfigurationId& cid : members) {
            const double s = matrix.score_at(matrix.config_index(cid), q);
            if (s > best_score) {  // members sorted: first strict max wins ties
                best_score = s;
                best = &cid;
            }
        }
        index.entries.emplace_back(qid, *best);
    }
    return index;
}

QueryFeatureVector TrainedModel::transform(const QueryFeatureVector& vector) const {
    if (!zscore) {
        return vector;
    }
    if (vector.values.size() != zscore_mean.size()) {
        throw contract_error("z-score transform dimension mismatch");
    }
    QueryFeatureVector out = vector;
    for (std::size_t i = 0; i < out.values.size(); ++i) {
        out.values[i] =
            zscore_sd[i] > 0.0 ? (out.values[i] - zscore_mean[i]) / zscore_sd[i] : 0.0;
    }
    return out;
}

std::string TrainedModel::to_json_string() const {
    ordered_json doc;
    doc["schema"] = schema;
    doc["feature_source"] = feature_source;
    doc["aggregation_depth"] = aggregation_depth;
    doc["zscore"] = zscore;
    if (zscore) {
        doc["zscore_mean"] = zscore_mean;
        doc["zscore_sd"] = zscore_sd;
    }
    doc["pool"] = ordered_json::parse(pool.to_json_string());
    doc["pool_tag"] = index.pool_tag;
    doc["index"] = ordered_json::array();
    for (const auto& [qid, cid] : index.entries) {
        doc["index"].push_back(ordered_json{{"query_id", qid}, {"config_id", cid}});
    }
    doc["vectors"] = ordered_json::array();
    for (const QueryFeatureVector& v : training_vectors) {
        doc["vectors"].push_back(ordered_json{{"query_id", v.query_id}, {"values", v.values}});
    }
    return doc.dump(2) + "\n";
}

TrainedModel TrainedModel::from_json_string(const std::string& text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("bad model JSON: ") + e.what());
    }
    TrainedModel model;
    try {
        model.schema = doc.at("schema").get<std::vector<std::string>>();
        model.feature_source = doc.value("feature_source", std::string());
        model.aggregation_depth = doc.value("aggregation_depth", 10);
        model.zscore = doc.value("zscore", false);
        if (model.zscore) {
            model.zscore_mean = doc.at("zscore_mean").get<std::vector<double>>();
            model.zscore_sd = doc.at("zscore_sd").get<std::vector<double>>();
        }
        model.pool = SelectedPool::from_json_string(doc.at("pool").dump());
        model.index.pool_tag = doc.value("pool_tag", std::string());
        model.index.metric_name = model.pool.metric_name;
        for (const auto& entry : doc.at("index")) {
            model.index.entries.emplace_back(entry.at("query_id").get<std::string>(),
                                             entry.at("config_id").get<std::string>());
        }
        for (const auto& entry : doc.at("vectors")) {
            QueryFeatureVector v;
            v.query_id = entry.at("query_id").get<std::string>();
            v.names = model.schema;
            v.values = entry.at("values").get<std::vector<double>>();
            model.training_vectors.push_back(std::move(v));
        }
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("bad model JSON: ") + e.what());
    }
    return model;
}

TrainedModel train_model(const std::vector<QueryId>& train_queries, const SelectedPool& pool,
                         const EffectivenessMatrix& matrix,
                         const std::vector<QueryFeatureVector>& features, bool zscore,
                         const std::string& feature_source, int aggregation_depth) {
    if (train_queries.empty()) {
        throw contract_error("train_model needs at least one training query");
    }
    std::unordered_map<QueryId, const QueryFeatureVector*> by_query;
    for (const QueryFeatureVector& v : features) {
        by_query[v.query_id] = &v;
    }
    TrainedModel model;
    model.pool = pool;
    model.feature_source = feature_source;
    model.aggregation_depth = aggregation_depth;
    model.index = build_best_config_index(train_queries, pool, matrix);

    std::vector<QueryId> sorted_queries = train_queries;
    std::sort(sorted_queries.begin(), sorted_queries.end());
    for (const QueryId& qid : sorted_queries) {
        auto it = by_query.find(qid);
        if (it == by_query.end()) {
            throw contract_error("no feature vector for training query " + qid);
        }
        model.training_vectors.push_back(*it->second);
    }
    model.schema = model.training_vectors.front().names;
    for (const QueryFeatureVector& v : model.training_vectors) {
        if (v.names != model.schema) {
            throw contract_error("feature schema of query " + v.query_id +
                                 " differs from the training schema");
        }
    }

    if (zscore) {
        model.zscore = true;
        const std::size_t dim = model.schema.size();
        model.zscore_mean.assign(dim, 0.0);
        model.zscore_sd.assign(dim, 0.0);
        const double n = static_cast<double>(model.training_vectors.size());
        for (const QueryFeatureVector& v : model.training_vectors) {
            for (std::size_t i = 0; i < dim; ++i) {
                model.zscore_mean[i] += v.values[i];
            }
        }
        for (std::size_t i = 0; i < dim; ++i) {
            model.zscore_mean[i] /= n;
        }
        for (const QueryFeatureVector& v : model.training_vectors) {
            for (std::size_t i = 0; i < dim; ++i) {
                const double diff = v.values[i] - model.zscore_mean[i];
                model.zscore_sd[i] += diff * diff;
            }
        }
        for (std::size_t i = 0; i < dim; ++i) {
            model.zscore_sd[i] = std::sqrt(model.zscore_sd[i] / n);
        }
        for (QueryFeatureVector& v : model.training_vectors) {
            v = model.transform(v);
        }
    }
    return model;
}

MatchResult best_match_configuration(const TrainedModel& model,
                                     const QueryFeatureVector& test_features) {
    if (model.training_vectors.empty()) {
        throw contract_error("best_match_configuration over an empty training set");
    }
    if (test_features.names != model.schema) {
        throw contract_error("test feature schema differs from the model schema");
    }
    const QueryFeatureVector probe = model.transform(test_features);
    const QueryFeatureVector* best = nullptr;
    double best_similarity = 0.0;
    for (const QueryFeatureVector& candidate : model.training_vectors) {
        const double similarity = cosine(probe, candidate);
        // Vectors are sorted by query id, so a strict max keeps the
        // lexicographically smallest id on ties.
        if (!best || similarity > best_similarity) {
            best = &candidate;
            best_similarity = similarity;
        }
    }
    MatchResult result;
    result.config_id = model.index.at(best->query_id);
    result.matched_query = best->query_id;
    result.similarity = best_similarity;
    return result;
}

}  // namespace sqp
