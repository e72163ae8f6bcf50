#include <catch2/catch_amalgamated.hpp>

#include "lpi/mdp.hpp"
#include "test_helpers.hpp"

using Catch::Matchers::WithinAbs;
using lpi::FactoredMdp;

TEST_CASE("finalize builds codecs and validates", "[mdp]") {
    FactoredMdp m = testenv::chain2_env();
    REQUIRE(m.n() == 2);
    REQUIRE(m.n_states() == 4);
    REQUIRE(m.n_actions() == 4);
    REQUIRE(m.n_pairs() == 16);
    REQUIRE(m.default_state == std::vector<int>{0, 0});
    REQUIRE(m.default_action == std::vector<int>{0, 0});
}

TEST_CASE("local rewards and global mean", "[mdp]") {
    FactoredMdp m = testenv::chain2_env();
    REQUIRE_THAT(m.local_reward(0, 1, 0), WithinAbs(1.0, 1e-15));
    REQUIRE_THAT(m.local_reward(1, 1, 1), WithinAbs(0.7, 1e-15));
    REQUIRE_THAT(m.global_reward({1, 0}, {0, 1}), WithinAbs(0.5 * (1.0 + 0.4), 1e-15));
}

TEST_CASE("global transition probability is the product of local ones", "[mdp]") {
    FactoredMdp m = testenv::chain2_env();
    // from (s0, s1) = (0, 1), a = (0, 1): agent 0 sees s1 = 1 so P(0) = 0.9;
    // agent 1 plays a = 1 so P(0) = 0.7
    REQUIRE_THAT(m.global_transition_prob({0, 1}, {0, 1}, {0, 0}),
                 WithinAbs(0.9 * 0.7, 1e-15));
    REQUIRE_THAT(m.global_transition_prob({0, 1}, {0, 1}, {1, 1}),
                 WithinAbs(0.1 * 0.3, 1e-15));
    double total = 0.0;
    for (int u = 0; u < 2; ++u)
        for (int v = 0; v < 2; ++v) total += m.global_transition_prob({0, 1}, {0, 1}, {u, v});
    REQUIRE_THAT(total, WithinAbs(1.0, 1e-12));
}

TEST_CASE("sampling follows the kernel", "[mdp]") {
    FactoredMdp m = testenv::chain2_env();
    lpi::Rng rng(lpi::derive_seed(7, {1}));
    std::vector<int> s = {0, 1}, a = {0, 1}, nx;
    int zeros0 = 0, zeros1 = 0;
    const int trials = 4000;
    for (int t = 0; t < trials; ++t) {
        m.sample_step(s, a, rng, nx);
        zeros0 += nx[0] == 0;
        zeros1 += nx[1] == 0;
    }
    REQUIRE_THAT(zeros0 / double(trials), WithinAbs(0.9, 0.03));
    REQUIRE_THAT(zeros1 / double(trials), WithinAbs(0.7, 0.03));
}

TEST_CASE("kernel row validation names the offender", "[mdp]") {
    FactoredMdp m = testenv::chain2_env();
    m.kernels[1][0] += 0.5;
    try {
        m.finalize();
        FAIL("expected a validation error");
    } catch (const std::invalid_argument& e) {
        REQUIRE(std::string(e.what()).find("agent 1") != std::string::npos);
    }
}

TEST_CASE("tiny kernel row drift is renormalized", "[mdp]") {
    FactoredMdp m = testenv::chain2_env();
    m.kernels[0][0] += 1e-10;
    REQUIRE_NOTHROW(m.finalize());
    double sum = 0.0;
    for (int s = 0; s < 2; ++s) sum += m.kernel_row(0, 0, 0)[s];
    REQUIRE_THAT(sum, WithinAbs(1.0, 1e-15));
}

TEST_CASE("parameter validation", "[mdp]") {
    FactoredMdp m = testenv::chain2_env();
    m.gamma = 1.0;
    REQUIRE_THROWS_AS(m.finalize(), std::invalid_argument);
    m = testenv::chain2_env();
    m.tau = -0.1;
    REQUIRE_THROWS_AS(m.finalize(), std::invalid_argument);
    m = testenv::chain2_env();
    m.rewards[0][2] = 1.5;  // above r_bar
    REQUIRE_THROWS_AS(m.finalize(), std::invalid_argument);
    m = testenv::chain2_env();
    m.rewards[1][0] = -0.2;
    REQUIRE_THROWS_AS(m.finalize(), std::invalid_argument);
}

TEST_CASE("uniform initial distribution", "[mdp]") {
    FactoredMdp m = testenv::chain2_env();
    REQUIRE_THAT(m.rho.density({0, 0}), WithinAbs(0.25, 1e-15));
    double total = 0.0;
    std::vector<int> s;
    for (std::int64_t idx = 0; idx < m.n_states(); ++idx) {
        m.state_codec.decode(idx, s);
        total += m.rho.density(s);
    }
    REQUIRE_THAT(total, WithinAbs(1.0, 1e-12));
}

TEST_CASE("mixture initial distribution validates and sums to one", "[mdp]") {
    FactoredMdp m = testenv::chain2_env();
    m.rho.weights = {0.25, 0.75};
    m.rho.comps = {{{1.0, 0.0}, {0.5, 0.5}}, {{0.0, 1.0}, {0.2, 0.8}}};
    REQUIRE_NOTHROW(m.finalize());
    REQUIRE_THAT(m.rho.density({0, 1}), WithinAbs(0.25 * 1.0 * 0.5, 1e-15));
    double total = 0.0;
    std::vector<int> s;
    for (std::int64_t idx = 0; idx < m.n_states(); ++idx) {
        m.state_codec.decode(idx, s);
        total += m.rho.density(s);
    }
    REQUIRE_THAT(total, WithinAbs(1.0, 1e-12));

    m.rho.weights = {0.5, 0.4};
    REQUIRE_THROWS_AS(m.finalize(), std::invalid_argument);
}

TEST_CASE("default extensions", "[mdp]") {
    FactoredMdp m = testenv::chain2_env();
    REQUIRE(m.extend_state({1}, {1}) == std::vector<int>{0, 1});
    REQUIRE(m.extend_state({0, 1}, {1, 1}) == std::vector<int>{1, 1});
    REQUIRE(m.extend_action({0}, {1}) == std::vector<int>{1, 0});
}

TEST_CASE("state-action cap guard", "[mdp]") {
    FactoredMdp m = testenv::chain2_env();
    REQUIRE_NOTHROW(m.require_pairs_cap(16, "test"));
    REQUIRE_THROWS_AS(m.require_pairs_cap(15, "test"), lpi::CapError);
}
