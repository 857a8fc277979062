#include "sqp/synth.hpp"

#include <algorithm>
#include <cstdio>
#include <string>

#include "sqp/rng.hpp"

namespace sqp {

namespace {

std::string padded(const char* prefix, int value) {
    char buffer[32];
    std::snprintf(buffer, sizeof(buffer), "%s%02d", prefix, value);
    return buffer;
}

}  // namespace

void SynthSpec::validate() const {
    if (n_clusters < 1 || configs_per_cluster < 1 || queries_per_cluster < 1) {
        throw contract_error("synth spec: all counts must be >= 1");
    }
    if (noise_sd < 0.0 || planted_gap < 0.0 || base_effectiveness < 0.0) {
        throw contract_error("synth spec: base, gap and noise must be >= 0");
    }
    if (base_effectiveness + planted_gap + 3.0 * noise_sd > 1.0) {
        throw contract_error("synth spec: base + gap + 3*noise_sd must be <= 1");
    }
    if (feature_dim != 0 && feature_dim < n_clusters) {
        throw contract_error("synth spec: feature_dim must be >= n_clusters");
    }
}

std::vector<FeatureRecord> SynthData::feature_records() const {
    std::vector<FeatureRecord> records;
    for (const QueryFeatureVector& v : features) {
        for (std::size_t i = 0; i < v.names.size(); ++i) {
            records.push_back(FeatureRecord{v.query_id, "d0", v.names[i], v.values[i]});
        }
    }
    return records;
}

SynthData synth_generate(const SynthSpec& spec) {
    spec.validate();
    const int dim = spec.feature_dim == 0 ? spec.n_clusters : spec.feature_dim;
    const int n_queries = spec.n_clusters * spec.queries_per_cluster;
    const int n_configs = spec.n_clusters * spec.configs_per_cluster;

    SynthData data;
    Rng score_rng(seed_for(spec.seed, 0));
    Rng feature_rng(seed_for(spec.seed, 1));

    auto noisy = [&](double value) {
        const double perturbed =
            spec.noise_sd > 0.0 ? value + spec.noise_sd * score_rng.normal() : value;
        return std::clamp(perturbed, 0.0, 1.0);
    };

    // Config roster: one specialist per cluster, one generalist when there
    // is room, fillers for the rest.
    struct ConfigRole {
        ConfigurationId id;
        int specialist_cluster;  // -1 none
        bool generalist;
    };
    std::vector<ConfigRole> roles;
    for (int c = 0; c < spec.n_clusters; ++c) {
        ConfigurationId id = padded("spec", c);
        roles.push_back(ConfigRole{id, c, false});
        data.specialists.push_back(id);
    }
    if (static_cast<int>(roles.size()) < n_configs) {
        data.generalist = "gen00";
        roles.push_back(ConfigRole{data.generalist, -1, true});
    } else {
        // A 1-cluster, 1-config-per-cluster landscape has no separate
        // generalist; the specialist carries both roles.
        data.generalist = data.specialists.front();
    }
    for (int f = 0; static_cast<int>(roles.size()) < n_configs; ++f) {
        roles.push_back(ConfigRole{padded("fill", f), -1, false});
    }

    std::vector<QueryId> query_ids;
    for (int q = 0; q < n_queries; ++q) {
        char buffer[16];
        std::snprintf(buffer, sizeof(buffer), "q%03d", q);
        query_ids.emplace_back(buffer);
        data.query_cluster.push_back(q / spec.queries_per_cluster);
    }

    EffectivenessMatrix matrix("synthetic");
    for (const ConfigRole& role : roles) {
        for (int q = 0; q < n_queries; ++q) {
            double value = spec.base_effectiveness;
            if (role.specialist_cluster == data.query_cluster[q]) {
                value += spec.planted_gap;
            } else if (role.generalist) {
                value += spec.planted_gap / 2.0;
            }
            matrix.add_cell(role.id, query_ids[q], noisy(value));
        }
    }
    matrix.finalize();
    data.matrix = std::move(matrix);

    std::vector<std::string> schema;
    for (int f = 0; f < dim; ++f) {
        schema.push_back(padded("f", f));
    }
    for (int q = 0; q < n_queries; ++q) {
        QueryFeatureVector v;
        v.query_id = query_ids[q];
        v.names = schema;
        for (int f = 0; f < dim; ++f) {
            double value = f == data.query_cluster[q] ? 1.0 : 0.0;
            if (spec.noise_sd > 0.0) {
                value += spec.noise_sd * feature_rng.normal();
            }
            v.values.push_back(value);
        }
        data.features.push_back(std::move(v));
    }

    // Descriptors: alternate expansion / no-expansion so selective-QE
    // baselines have both classes to contrast.
    for (std::size_t i = 0; i < roles.size(); ++i) {
        ConfigurationDescriptor d;
        d.config_id = roles[i].id;
        d.retrieval_model = padded("rm", static_cast<int>(i / 2));
        if (i % 2 == 0) {
            d.qe_model = "No";
        } else {
            d.qe_model = "Bo1";
            d.qe_docs = 10;
            d.qe_terms = 5;
            d.qe_min_docs = 2;
        }
        d.validate();
        data.descriptors.push_back(std::move(d));
    }
    return data;
}

}  // namespace sqp
