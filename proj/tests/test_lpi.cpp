#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "lpi/lpi.hpp"
#include "test_helpers.hpp"

using namespace lpi;

namespace {

// fills each agent's beta-hop table with reproducible pseudo-random values
std::vector<TruncatedQ> synthetic_tables(const FactoredMdp& m, int beta) {
    std::vector<TruncatedQ> tqs;
    for (int i = 0; i < m.n(); ++i) {
        TruncatedQ q = make_truncated_q(m, i, beta);
        Rng r(derive_seed(99, {std::uint64_t(i)}));
        for (double& x : q.table) x = 2.0 * r.uniform() - 1.0;
        tqs.push_back(std::move(q));
    }
    return tqs;
}

// reference multiplicative-weights pass for the two-agent chain with full
// one-hop views: both agents' rows are indexed by the same full-state codec
// (s0 fastest) and the aggregated action index is a0 + 2 a1
JointPolicy mw_step_full(const std::vector<AggregatedQ>& agg, const JointPolicy& prev, double eta,
                         double tau) {
    JointPolicy next = prev;
    for (int i = 0; i < 2; ++i) {
        int other = 1 - i;
        for (std::int64_t r = 0; r < 4; ++r) {
            double logits[2];
            for (int ai = 0; ai < 2; ++ai) {
                double e = 0.0;
                for (int ao = 0; ao < 2; ++ao) {
                    std::int64_t at = (i == 0) ? (ai + 2 * ao) : (ao + 2 * ai);
                    e += prev[std::size_t(other)].row(r)[ao] *
                         agg[std::size_t(i)].table[std::size_t(r * 4 + at)];
                }
                logits[ai] = eta * e + (1.0 - eta * tau) * std::log(prev[std::size_t(i)].row(r)[ai]);
            }
            double mx = std::max(logits[0], logits[1]);
            double w0 = std::exp(logits[0] - mx), w1 = std::exp(logits[1] - mx);
            next[std::size_t(i)].row(r)[0] = w0 / (w0 + w1);
            next[std::size_t(i)].row(r)[1] = w1 / (w0 + w1);
        }
    }
    return next;
}

}  // namespace

TEST_CASE("aggregation averages the neighborhood tables over n", "[lpi]") {
    FactoredMdp m = testenv::chain2_env();
    JointPolicy zeta = uniform_policy(m, 1);
    std::vector<TruncatedQ> tqs;
    std::vector<LocalQTable> fulls;
    for (int i = 0; i < 2; ++i) {
        fulls.push_back(local_q(m, zeta, i));
        tqs.push_back(truncate_local_q(m, fulls.back(), 1));
    }

    AggregatedQ a0 = aggregate_q(m, tqs, 0, 1);
    REQUIRE(a0.members == std::vector<int>{0, 1});
    REQUIRE(a0.s_codec.size == 4);
    REQUIRE(a0.a_codec.size == 4);
    for (std::int64_t s = 0; s < 4; ++s)
        for (std::int64_t a = 0; a < 4; ++a) {
            double want = 0.5 * (fulls[0].table[std::size_t(s * 4 + a)] +
                                 fulls[1].table[std::size_t(s * 4 + a)]);
            CHECK(a0.table[std::size_t(s * 4 + a)] == Catch::Approx(want).margin(1e-12));
        }
}

TEST_CASE("aggregation fills unseen coordinates with the defaults", "[lpi]") {
    FactoredMdp m = testenv::chain2_env();
    auto tqs = synthetic_tables(m, 1);

    // kappa = 0: agent 0 sees only itself, the missing digits read default 0,
    // and only its own table contributes (weight 1/n)
    AggregatedQ a0 = aggregate_q(m, tqs, 0, 0);
    REQUIRE(a0.members == std::vector<int>{0});
    for (std::int64_t s0 = 0; s0 < 2; ++s0)
        for (std::int64_t a0i = 0; a0i < 2; ++a0i) {
            double want = 0.5 * tqs[0].at(s0, a0i);  // (s0, s1=0), (a0, a1=0)
            CHECK(a0.table[std::size_t(s0 * 2 + a0i)] == Catch::Approx(want).margin(1e-15));
        }

    CHECK_THROWS_AS(aggregate_q(m, {tqs[0]}, 0, 0), std::invalid_argument);
}

TEST_CASE("one improvement pass matches the update formula", "[lpi]") {
    FactoredMdp m = testenv::chain2_env();
    auto tqs = synthetic_tables(m, 1);
    std::vector<AggregatedQ> agg;
    for (int i = 0; i < 2; ++i) agg.push_back(aggregate_q(m, tqs, i, 1));

    for (double eta : {0.3, 1.0}) {
        JointPolicy got = soft_policy_improvement(m, uniform_policy(m, 1), tqs, 1, eta, 1.0, 1);
        JointPolicy want = mw_step_full(agg, uniform_policy(m, 1), eta, 1.0);
        for (int i = 0; i < 2; ++i)
            for (std::int64_t r = 0; r < 4; ++r)
                for (int a = 0; a < 2; ++a)
                    CHECK(got[std::size_t(i)].row(r)[a] ==
                          Catch::Approx(want[std::size_t(i)].row(r)[a]).margin(1e-12));
    }
}

TEST_CASE("passes are synchronous and keep the prior when eta tau < 1", "[lpi]") {
    FactoredMdp m = testenv::chain2_env();
    auto tqs = synthetic_tables(m, 1);
    std::vector<AggregatedQ> agg;
    for (int i = 0; i < 2; ++i) agg.push_back(aggregate_q(m, tqs, i, 1));

    JointPolicy got = soft_policy_improvement(m, uniform_policy(m, 1), tqs, 1, 0.3, 1.0, 2);
    JointPolicy want = mw_step_full(agg, mw_step_full(agg, uniform_policy(m, 1), 0.3, 1.0), 0.3, 1.0);
    for (int i = 0; i < 2; ++i)
        for (std::int64_t r = 0; r < 4; ++r)
            for (int a = 0; a < 2; ++a)
                CHECK(got[std::size_t(i)].row(r)[a] ==
                      Catch::Approx(want[std::size_t(i)].row(r)[a]).margin(1e-12));
}

TEST_CASE("improvement on the bandit reproduces the softmax policy", "[lpi]") {
    FactoredMdp m = testenv::bandit_env();
    JointPolicy zhat = uniform_policy(m, 0);
    std::vector<TruncatedQ> tqs{truncate_local_q(m, local_q(m, zhat, 0), 0)};

    // Q(0) - Q(1) = 1 under any policy here, so with eta = 1/tau a single
    // pass from uniform lands on pi(0) = e / (1 + e)
    for (int p_max : {1, 200}) {
        JointPolicy pi = soft_policy_improvement(m, zhat, tqs, 0, 1.0, 1.0, p_max);
        double e = std::exp(1.0);
        CHECK(pi[0].row(0)[0] == Catch::Approx(e / (1.0 + e)).margin(1e-12));
        CHECK(pi[0].row(0)[1] == Catch::Approx(1.0 / (1.0 + e)).margin(1e-12));
    }
}

TEST_CASE("zero passes return the uniform policy and bad arguments throw", "[lpi]") {
    FactoredMdp m = testenv::chain2_env();
    auto tqs = synthetic_tables(m, 1);

    JointPolicy pi = soft_policy_improvement(m, uniform_policy(m, 1), tqs, 1, 0.3, 1.0, 0);
    for (int i = 0; i < 2; ++i)
        for (std::int64_t r = 0; r < 4; ++r)
            for (int a = 0; a < 2; ++a) CHECK(pi[std::size_t(i)].row(r)[a] == 0.5);

    CHECK_THROWS_AS(soft_policy_improvement(m, pi, tqs, 1, 0.0, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(soft_policy_improvement(m, pi, tqs, 1, 1.3, 1.0, 1), std::invalid_argument);
    CHECK_THROWS_AS(soft_policy_improvement(m, pi, tqs, 1, 0.3, 1.0, -1), std::invalid_argument);
}

TEST_CASE("monte carlo return agrees with the closed-form bandit value", "[lpi]") {
    FactoredMdp m = testenv::bandit_env();
    JointPolicy zeta = uniform_policy(m, 0);
    Rng rng(derive_seed(17, {0}));
    double est = mc_return(m, zeta, 4000, rng);
    CHECK(est == Catch::Approx(1.0 + 2.0 * std::log(2.0)).margin(0.05));
    CHECK_THROWS_AS(mc_return(m, zeta, 0, rng), std::invalid_argument);
}

TEST_CASE("evaluator factory validates its arguments", "[lpi]") {
    FactoredMdp m = testenv::chain2_env();
    LPIConfig cfg;
    cfg.tau = 1.0;
    cfg.eval_kind = "bogus";
    CHECK_THROWS_AS(make_evaluator(m, cfg), std::invalid_argument);
    cfg.eval_kind = "localized-td0";
    cfg.td_schedule = "bogus";
    CHECK_THROWS_AS(make_evaluator(m, cfg), std::invalid_argument);
    cfg.td_schedule = "constant";
    CHECK(make_evaluator(m, cfg)->kind() == "localized-td0");
    cfg.eval_kind = "exact-oracle";
    CHECK(make_evaluator(m, cfg)->kind() == "exact-oracle");
}

TEST_CASE("training runs are deterministic for a fixed seed", "[lpi]") {
    FactoredMdp m = testenv::chain2_env();
    LPIConfig cfg;
    cfg.kappa = 1;
    cfg.beta = 1;
    cfg.tau = 1.0;
    cfg.p_max = 5;
    cfg.M = 2;
    cfg.T = 300;
    cfg.td_alpha = 0.2;
    cfg.return_episodes = 8;
    cfg.seed = 123;

    auto ev1 = make_evaluator(m, cfg);
    LpiResult r1 = lpi_run(m, cfg, *ev1);
    auto ev2 = make_evaluator(m, cfg);
    LpiResult r2 = lpi_run(m, cfg, *ev2);

    REQUIRE(r1.metrics.rows.size() == 3u);
    CHECK(r1.metrics.eval_kind == "localized-td0");
    CHECK(r1.metrics.rows[0].iteration == 0);
    CHECK(r1.metrics.rows[2].iteration == 2);
    CHECK(r1.metrics.rows[0].sigma_regularity == 0.0);  // uniform start
    CHECK(std::isnan(r1.metrics.rows[0].exact_j));
    for (std::size_t t = 0; t < 3; ++t) {
        CHECK(r1.metrics.rows[t].return_estimate == r2.metrics.rows[t].return_estimate);
        CHECK(r1.metrics.rows[t].sigma_regularity == r2.metrics.rows[t].sigma_regularity);
    }
    for (int i = 0; i < 2; ++i) CHECK(r1.policy[std::size_t(i)].table == r2.policy[std::size_t(i)].table);
}

TEST_CASE("an oracle-driven run improves the exact objective", "[lpi]") {
    FactoredMdp m = testenv::chain2_env();
    LPIConfig cfg;
    cfg.kappa = 1;
    cfg.beta = 1;
    cfg.tau = 1.0;
    cfg.p_max = 40;
    cfg.M = 6;
    cfg.T = 10;
    cfg.return_episodes = 4;
    cfg.exact_metrics = true;
    cfg.eval_kind = "exact-oracle";
    cfg.seed = 11;

    auto ev = make_evaluator(m, cfg);
    LpiResult r = lpi_run(m, cfg, *ev);
    REQUIRE(r.metrics.rows.size() == 7u);
    const auto& rows = r.metrics.rows;
    REQUIRE(rows[0].value_gap > 0.0);
    for (std::size_t t = 1; t < rows.size(); ++t) {
        CHECK(rows[t].exact_j >= rows[t - 1].exact_j - 1e-6);
        CHECK(rows[t].value_gap <= rows[t - 1].value_gap + 1e-6);
    }
    CHECK(rows.back().value_gap < rows.front().value_gap / 4.0);
    CHECK(rows.back().value_gap < 0.05);
}

TEST_CASE("run configuration errors are caught up front", "[lpi]") {
    FactoredMdp m = testenv::chain2_env();
    LPIConfig cfg;
    cfg.tau = 0.5;  // instance has tau = 1
    auto ev = std::make_unique<ExactOracleEvaluator>();
    CHECK_THROWS_AS(lpi_run(m, cfg, *ev), std::invalid_argument);

    cfg.tau = 1.0;
    cfg.kappa = -1;
    CHECK_THROWS_AS(lpi_run(m, cfg, *ev), std::invalid_argument);

    cfg.kappa = 1;
    cfg.beta = 0;
    cfg.M = 1;
    cfg.T = 50;
    LpiResult r = lpi_run(m, cfg, *ev);
    REQUIRE_FALSE(r.metrics.warnings.empty());  // kappa wider than beta

    cfg.beta = 1;
    LpiResult r2 = lpi_run(m, cfg, *ev);
    CHECK(r2.metrics.warnings.empty());
}
