#include "sqp/folds.hpp"

#include <algorithm>
#include <set>

#include "sqp/rng.hpp"

namespace sqp {

FoldPlan split_folds(const std::vector<QueryId>& queries, int draws, std::uint64_t seed) {
    if (draws < 1) {
        throw contract_error("split_folds requires at least one draw");
    }
    std::set<QueryId> unique(queries.begin(), queries.end());
    if (unique.size() != queries.size()) {
        throw contract_error("split_folds given duplicate query ids");
    }
    if (queries.size() < 2) {
        throw contract_error("split_folds requires at least 2 queries");
    }
    std::vector<QueryId> canonical(unique.begin(), unique.end());

    FoldPlan plan;
    plan.seed = seed;
    const std::size_t half = (canonical.size() + 1) / 2;
    for (int d = 0; d < draws; ++d) {
        std::vector<QueryId> shuffled = canonical;
        Rng rng(seed_for(seed, static_cast<std::uint64_t>(d)));
        rng.shuffle(shuffled);
        FoldPair forward;
        forward.train.assign(shuffled.begin(), shuffled.begin() + half);
        forward.test.assign(shuffled.begin() + half, shuffled.end());
        FoldPair reverse;
        reverse.train = forward.test;
        reverse.test = forward.train;
        plan.draws.push_back({std::move(forward), std::move(reverse)});
    }
    return plan;
}

}  // namespace sqp
