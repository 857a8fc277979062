#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "oracles.hpp"
#include "sqp/rng.hpp"
#include "sqp/risk.hpp"

using namespace sqp;

namespace {

RiskParams params_for(Objective objective, double beta, int k, ConfigurationId baseline) {
    RiskParams p;
    p.objective = objective;
    p.beta = beta;
    p.k = k;
    p.baseline_id = std::move(baseline);
    return p;
}

}  // namespace

TEST_SUITE_BEGIN("risk");

TEST_CASE("envelope on the toy fixture") {
    auto m = oracles::toy_matrix();
    CHECK(envelope({"c2"}, "q4", m) == doctest::Approx(0.2).epsilon(1e-15));
    CHECK(envelope({"c1", "c2"}, "q4", m) == doctest::Approx(0.9).epsilon(1e-15));
    for (const auto& c : m.configs()) {
        for (const auto& q : m.queries()) {
            CHECK(envelope({c}, q, m) == m.score(c, q));
        }
    }
    CHECK_THROWS_AS(envelope({}, "q1", m), contract_error);
}

TEST_CASE("e_risk / e_reward on the toy fixture") {
    auto m = oracles::toy_matrix();
    const std::vector<QueryId> queries = m.queries();
    CHECK(e_risk("c1", {"c2"}, m, queries) == doctest::Approx(0.8 / 7).epsilon(1e-12));
    CHECK(e_reward("c1", {"c2"}, m, queries) == doctest::Approx(0.7 / 7).epsilon(1e-12));
    CHECK(e_risk("c2", {"c2"}, m, queries) == 0.0);
    CHECK(e_reward("c2", {"c2"}, m, queries) == 0.0);
}

TEST_CASE("constant-margin rows give risk/reward equal to the margin") {
    EffectivenessMatrix m("toy");
    for (int q = 0; q < 5; ++q) {
        const QueryId qid = "q" + std::to_string(q);
        m.add_cell("lo", qid, 0.4);
        m.add_cell("hi", qid, 0.4 + 0.25);
    }
    m.finalize();
    const auto queries = m.queries();
    CHECK(e_risk("lo", {"hi"}, m, queries) == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(e_reward("hi", {"lo"}, m, queries) == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("n_risk / n_reward strict counting on the toy fixture") {
    auto m = oracles::toy_matrix();
    const auto queries = m.queries();
    CHECK(n_risk("c1", {"c2"}, m, queries) == doctest::Approx(6.0 / 7).epsilon(1e-12));
    CHECK(n_reward("c1", {"c2"}, m, queries) == doctest::Approx(1.0 / 7).epsilon(1e-12));
    CHECK(n_reward("c3", {"c2"}, m, queries) == doctest::Approx(1.0 / 7).epsilon(1e-12));
    CHECK(n_risk("c3", {"c3"}, m, queries) == 0.0);

    // Exact ties count neither as risk nor as reward.
    EffectivenessMatrix ties("toy");
    for (int q = 0; q < 4; ++q) {
        const QueryId qid = "q" + std::to_string(q);
        ties.add_cell("a", qid, 0.5);
        ties.add_cell("b", qid, 0.5);
    }
    ties.finalize();
    CHECK(n_risk("a", {"b"}, ties, ties.queries()) == 0.0);
    CHECK(n_reward("a", {"b"}, ties, ties.queries()) == 0.0);
}

TEST_CASE("gain combines objective pair with (1+beta) risk weight") {
    auto m = oracles::toy_matrix();
    const auto queries = m.queries();

    GainBreakdown e0 = gain("c1", {"c2"}, m, queries,
                            params_for(Objective::effectiveness, 0.0, 1, "c2"));
    CHECK(e0.gain == doctest::Approx(0.1 - 0.8 / 7).epsilon(1e-12));
    CHECK(e0.gain == doctest::Approx(e0.reward - e0.risk).epsilon(1e-15));

    GainBreakdown e1 = gain("c1", {"c2"}, m, queries,
                            params_for(Objective::effectiveness, 1.0, 1, "c2"));
    CHECK(e1.gain == doctest::Approx(0.1 - 2.0 * 0.8 / 7).epsilon(1e-12));

    GainBreakdown n0 =
        gain("c3", {"c2"}, m, queries, params_for(Objective::query_count, 0.0, 1, "c2"));
    CHECK(n0.gain == doctest::Approx(1.0 / 7 - 5.0 / 7).epsilon(1e-12));
}

TEST_CASE("get_best_rsc argmax and tie-breaking") {
    auto m = oracles::toy_matrix();
    const auto queries = m.queries();

    CHECK(get_best_rsc(queries, {"c1", "c3"}, m,
                       params_for(Objective::effectiveness, 0.0, 1, "c2"),
                       {"c2"}) == "c1");
    // The two objectives diverge on the same pool.
    CHECK(get_best_rsc(queries, {"c1", "c3"}, m,
                       params_for(Objective::query_count, 0.0, 1, "c2"),
                       {"c2"}) == "c3");

    // A duplicate of an envelope member has gain 0 and wins; ties among
    // gain-0 members go to the smallest id.
    EffectivenessMatrix dup("toy");
    for (int q = 0; q < 3; ++q) {
        const QueryId qid = "q" + std::to_string(q);
        dup.add_cell("base", qid, 0.6);
        dup.add_cell("twin_b", qid, 0.6);
        dup.add_cell("twin_a", qid, 0.6);
        dup.add_cell("worse", qid, 0.2);
    }
    dup.finalize();
    CHECK(get_best_rsc(dup.queries(), {"twin_b", "twin_a", "worse"}, dup,
                       params_for(Objective::effectiveness, 0.0, 1, "base"),
                       {"base"}) == "twin_a");

    CHECK_THROWS_AS(get_best_rsc(queries, {}, m,
                                 params_for(Objective::effectiveness, 0.0, 1, "c2"), {"c2"}),
                    contract_error);
}

TEST_CASE("select_configurations on the toy fixture, both objectives") {
    auto m = oracles::toy_matrix();
    const auto queries = m.queries();
    const std::vector<ConfigurationId> pool = m.configs();

    SelectedPool e = select_configurations(
        queries, pool, m, params_for(Objective::effectiveness, 0.0, 3, "c2"));
    REQUIRE(e.steps.size() == 3);
    CHECK(e.steps[0].config_id == "c2");
    CHECK(e.steps[1].config_id == "c1");
    CHECK(e.steps[2].config_id == "c3");
    CHECK(e.steps[0].gain == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(e.steps[1].gain == doctest::Approx(-1.0 / 70).epsilon(1e-12));
    CHECK(e.steps[2].gain == doctest::Approx(-1.5 / 7).epsilon(1e-12));
    CHECK(e.steps[0].envelope_mean_after == doctest::Approx(4.1 / 7).epsilon(1e-12));
    CHECK(e.steps[1].envelope_mean_after == doctest::Approx(4.8 / 7).epsilon(1e-12));
    CHECK(e.steps[2].envelope_mean_after == doctest::Approx(4.9 / 7).epsilon(1e-12));

    // Every toy step agrees with the definition-level oracle.
    auto expected =
        oracles::bf_select(m, queries, pool, "c2", Objective::effectiveness, 0.0, 3);
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(e.steps[i].config_id == expected[i].config_id);
        CHECK(e.steps[i].gain == doctest::Approx(expected[i].gain).epsilon(1e-12));
    }

    SelectedPool n = select_configurations(queries, pool, m,
                                           params_for(Objective::query_count, 0.0, 3, "c2"));
    REQUIRE(n.steps.size() == 3);
    CHECK(n.steps[0].config_id == "c2");
    CHECK(n.steps[1].config_id == "c3");
    CHECK(n.steps[2].config_id == "c1");
    CHECK(n.steps[1].gain == doctest::Approx(-4.0 / 7).epsilon(1e-12));
    CHECK(n.steps[2].gain == doctest::Approx(-5.0 / 7).epsilon(1e-12));

    // K=1 with the baseline in the pool keeps the baseline when nothing has
    // positive gain against it.
    SelectedPool k1 = select_configurations(queries, pool, m,
                                            params_for(Objective::effectiveness, 0.0, 1, "c2"));
    REQUIRE(k1.steps.size() == 1);
    CHECK(k1.steps[0].config_id == "c2");
    CHECK(k1.steps[0].gain == 0.0);
}

TEST_CASE("select_configurations matches the brute-force oracle on random matrices") {
    int checked = 0;
    for (std::uint64_t seed = 0; seed < 250; ++seed) {
        auto m = oracles::random_matrix(seed);
        const auto queries = m.queries();
        const auto pool = m.configs();
        for (Objective objective : {Objective::effectiveness, Objective::query_count}) {
            for (double beta : {0.0, 0.5, 1.0}) {
                const int k = 1 + static_cast<int>(seed % 3);
                if (k > static_cast<int>(pool.size())) {
                    continue;
                }
                const ConfigurationId baseline = pool[seed % pool.size()];
                SelectedPool selected = select_configurations(
                    queries, pool, m, params_for(objective, beta, k, baseline));
                auto expected =
                    oracles::bf_select(m, queries, pool, baseline, objective, beta, k);
                REQUIRE(selected.steps.size() == expected.size());
                for (std::size_t i = 0; i < expected.size(); ++i) {
                    CHECK(selected.steps[i].config_id == expected[i].config_id);
                    CHECK(selected.steps[i].gain ==
                          doctest::Approx(expected[i].gain).epsilon(1e-12));
                }
                ++checked;
            }
        }
    }
    CHECK(checked > 1000);
}

TEST_CASE("selection error paths") {
    auto m = oracles::toy_matrix();
    const auto queries = m.queries();
    CHECK_THROWS_AS(select_configurations(queries, m.configs(), m,
                                          params_for(Objective::effectiveness, 0.0, 4, "c2")),
                    contract_error);
    CHECK_THROWS_AS(select_configurations(queries, m.configs(), m,
                                          params_for(Objective::effectiveness, 0.0, 2, "cX")),
                    contract_error);
}

TEST_CASE("algebraic identity at beta=0: reward - risk = mean(p - envelope)") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        auto m = oracles::random_matrix(seed + 5000);
        const auto queries = m.queries();
        const auto configs = m.configs();
        Rng rng(seed);
        const ConfigurationId c = configs[rng.bounded(configs.size())];
        std::vector<ConfigurationId> s;
        for (const auto& id : configs) {
            if (rng.bounded(2) == 0) {
                s.push_back(id);
            }
        }
        if (s.empty()) {
            s.push_back(configs.front());
        }
        const double lhs = e_reward(c, s, m, queries) - e_risk(c, s, m, queries);
        double rhs = 0.0;
        for (const auto& q : queries) {
            rhs += m.score(c, q) - envelope(s, q, m);
        }
        rhs /= static_cast<double>(queries.size());
        CHECK(lhs == doctest::Approx(rhs).epsilon(1e-12));
    }
}

TEST_CASE("membership nullity: any c in S has zero reward and non-positive gain") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto m = oracles::random_matrix(seed + 7000);
        const auto queries = m.queries();
        const auto configs = m.configs();
        std::vector<ConfigurationId> s(configs.begin(),
                                       configs.begin() + 1 + seed % configs.size());
        for (const auto& c : s) {
            CHECK(e_reward(c, s, m, queries) == 0.0);
            CHECK(n_reward(c, s, m, queries) == 0.0);
            for (Objective objective : {Objective::effectiveness, Objective::query_count}) {
                CHECK(gain(c, s, m, queries, params_for(objective, 0.5, 1, s.front())).gain <=
                      0.0);
            }
        }
    }
}

TEST_CASE("range: risks and rewards stay in [0,1]") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto m = oracles::random_matrix(seed + 9000);
        const auto queries = m.queries();
        const auto configs = m.configs();
        std::vector<ConfigurationId> s{configs.front()};
        for (const auto& c : configs) {
            for (double v : {e_risk(c, s, m, queries), e_reward(c, s, m, queries),
                             n_risk(c, s, m, queries), n_reward(c, s, m, queries)}) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
        }
    }
}

TEST_CASE("scale covariance (E) and monotone invariance (N)") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        auto m = oracles::random_matrix(seed + 11000);
        const auto queries = m.queries();
        const auto configs = m.configs();
        const double lambda = 0.5;

        EffectivenessMatrix scaled("scaled");
        EffectivenessMatrix squashed("squashed");  // strictly monotone transform
        for (const auto& c : configs) {
            for (const auto& q : queries) {
                scaled.add_cell(c, q, lambda * m.score(c, q));
                squashed.add_cell(c, q, m.score(c, q) * 0.5 + 0.25);
            }
        }
        scaled.finalize();
        squashed.finalize();

        std::vector<ConfigurationId> s{configs.front()};
        for (const auto& c : configs) {
            CHECK(e_risk(c, s, scaled, queries) ==
                  doctest::Approx(lambda * e_risk(c, s, m, queries)).epsilon(1e-12));
            CHECK(e_reward(c, s, scaled, queries) ==
                  doctest::Approx(lambda * e_reward(c, s, m, queries)).epsilon(1e-12));
            CHECK(n_risk(c, s, squashed, queries) == n_risk(c, s, m, queries));
            CHECK(n_reward(c, s, squashed, queries) == n_reward(c, s, m, queries));
        }
        // The E-objective argmax is unchanged under uniform scaling.
        RiskParams params = params_for(Objective::effectiveness, 0.0, 1, configs.front());
        CHECK(get_best_rsc(queries, configs, m, params, s) ==
              get_best_rsc(queries, configs, scaled, params, s));
        // The N-objective argmax is invariant under the monotone transform.
        RiskParams nparams = params_for(Objective::query_count, 0.0, 1, configs.front());
        CHECK(get_best_rsc(queries, configs, m, nparams, s) ==
              get_best_rsc(queries, configs, squashed, nparams, s));
    }
}

TEST_CASE("permutation determinism: pool order never changes the selection") {
    for (std::uint64_t seed = 0; seed < 25; ++seed) {
        auto m = oracles::random_matrix(seed + 13000);
        const auto queries = m.queries();
        std::vector<ConfigurationId> pool = m.configs();
        RiskParams params =
            params_for(seed % 2 ? Objective::effectiveness : Objective::query_count, 0.0,
                       std::min<int>(3, static_cast<int>(pool.size())), pool.front());
        SelectedPool reference = select_configurations(queries, pool, m, params);
        Rng rng(seed);
        for (int shuffle = 0; shuffle < 3; ++shuffle) {
            rng.shuffle(pool);
            SelectedPool permuted = select_configurations(queries, pool, m, params);
            REQUIRE(permuted.steps.size() == reference.steps.size());
            for (std::size_t i = 0; i < reference.steps.size(); ++i) {
                CHECK(permuted.steps[i].config_id == reference.steps[i].config_id);
            }
        }
    }
}

TEST_CASE("envelope monotonicity along selection steps") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        auto m = oracles::random_matrix(seed + 15000);
        const auto pool = m.configs();
        RiskParams params = params_for(seed % 2 ? Objective::effectiveness
                                                : Objective::query_count,
                                       0.5, static_cast<int>(pool.size()), pool.back());
        SelectedPool selected = select_configurations(m.queries(), pool, m, params);
        for (std::size_t i = 1; i < selected.steps.size(); ++i) {
            CHECK(selected.steps[i].envelope_mean_after >=
                  selected.steps[i - 1].envelope_mean_after - 1e-15);
        }
    }
}

TEST_CASE("pool JSON round-trip") {
    auto m = oracles::toy_matrix();
    SelectedPool pool = select_configurations(
        m.queries(), m.configs(), m, params_for(Objective::effectiveness, 0.25, 3, "c2"));
    SelectedPool back = SelectedPool::from_json_string(pool.to_json_string());
    CHECK(back.objective == pool.objective);
    CHECK(back.beta == pool.beta);
    CHECK(back.baseline_id == pool.baseline_id);
    CHECK(back.metric_name == pool.metric_name);
    REQUIRE(back.steps.size() == pool.steps.size());
    for (std::size_t i = 0; i < pool.steps.size(); ++i) {
        CHECK(back.steps[i].config_id == pool.steps[i].config_id);
        CHECK(back.steps[i].risk == pool.steps[i].risk);
        CHECK(back.steps[i].reward == pool.steps[i].reward);
        CHECK(back.steps[i].gain == pool.steps[i].gain);
        CHECK(back.steps[i].envelope_mean_after == pool.steps[i].envelope_mean_after);
    }
}

TEST_SUITE_END();
