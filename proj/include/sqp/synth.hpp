#pragma once

#include <cstdint>
#include <vector>

#include "sqp/types.hpp"

namespace sqp {

/// Parameters of the synthetic clustered effectiveness landscape used for
/// desk-scale end-to-end runs.
struct SynthSpec {
    int n_clusters = 4;
    int configs_per_cluster = 3;
    int queries_per_cluster = 10;
    double base_effectiveness = 0.3;
    double planted_gap = 0.3;
    double noise_sd = 0.0;
    int feature_dim = 0;  // 0 = n_clusters
    std::uint64_t seed = 1;

    void validate() const;  // base + gap + 3*noise_sd <= 1, counts >= 1
};

struct SynthData {
    EffectivenessMatrix matrix;
    std::vector<QueryFeatureVector> features;  // one per query, schema f00..f..
    std::vector<ConfigurationDescriptor> descriptors;
    std::vector<int> query_cluster;              // cluster of each matrix query
    std::vector<ConfigurationId> specialists;    // one per cluster
    ConfigurationId generalist;

    /// The per-query vectors flattened into raw records (single document
    /// "d0" per query), the on-disk features format.
    std::vector<FeatureRecord> feature_records() const;
};

/// Plants one specialist per cluster (base+gap on its cluster's queries,
/// base elsewhere), one generalist (base+gap/2 everywhere) and filler
/// configurations (base everywhere) up to n_clusters * configs_per_cluster
/// total, all perturbed by Gaussian noise (sd = noise_sd) and clipped to
/// [0, 1]. Query features are the cluster one-hot plus Gaussian jitter of
/// the same sd. Deterministic per seed.
SynthData synth_generate(const SynthSpec& spec);

}  // namespace sqp
