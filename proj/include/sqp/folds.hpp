#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "sqp/types.hpp"

namespace sqp {

struct FoldPair {
    std::vector<QueryId> train;
    std::vector<QueryId> test;
};

/// Two-fold cross-validation plan: per draw a shuffled half/half split used
/// in both directions. Fully determined by (query set, draws, seed).
struct FoldPlan {
    std::uint64_t seed = 0;
    std::vector<std::array<FoldPair, 2>> draws;

    std::size_t measurements() const { return draws.size() * 2; }
};

/// For each draw d the query ids are sorted, Fisher-Yates shuffled with the
/// stream seed seed_for(seed, d), and split into a first half of
/// ceil(n / 2) and the remainder; pair 0 trains on the first half, pair 1
/// on the second. Errors on fewer than 2 distinct queries.
FoldPlan split_folds(const std::vector<QueryId>& queries, int draws, std::uint64_t seed);

}  // namespace sqp
