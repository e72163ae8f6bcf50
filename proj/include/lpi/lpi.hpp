#pragma once

// The localized policy iteration loop: collect an on-policy trajectory,
// estimate beta-hop local Q tables (TD or an exact oracle), aggregate them
// over each agent's kappa-hop neighborhood, and run a soft multiplicative
// weights improvement on every kappa-hop policy row. States and actions the
// local views cannot see are filled with the instance defaults.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <limits>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpi/exact.hpp"
#include "lpi/mdp.hpp"
#include "lpi/policy.hpp"
#include "lpi/qtable.hpp"
#include "lpi/td.hpp"
#include "lpi/trajectory.hpp"

namespace lpi {

struct LPIConfig {
    int kappa = 1;
    int beta = 1;
    double eta = 0.0;  // <= 0 selects 1/tau
    double tau = 0.0;  // must agree with the instance
    int p_max = 10;
    int M = 10;             // outer iterations
    std::int64_t T = 1000;  // trajectory transitions per iteration
    std::uint64_t seed = 1;

    std::string eval_kind = "localized-td0";  // or "exact-oracle"
    std::string td_schedule = "constant";     // or "polynomial"
    double td_alpha = 0.1;
    std::int64_t td_anneal_every = 0;
    double td_anneal_factor = 0.5;
    double td_xi = 0.0;  // polynomial schedule only
    double td_k2 = 1.0;

    int return_episodes = 32;
    bool exact_metrics = false;
    double exact_tol = 1e-9;
    std::int64_t cap = std::int64_t(1) << 20;
};

struct EvalResult {
    std::vector<TruncatedQ> qs;
    std::string notes;
};

class PolicyEvaluator {
public:
    virtual ~PolicyEvaluator() = default;
    virtual EvalResult evaluate(const FactoredMdp& m, const JointPolicy& zhat,
                                const Trajectory& traj, int beta) = 0;
    virtual std::string kind() const = 0;
};

class LocalizedTd0Evaluator : public PolicyEvaluator {
public:
    explicit LocalizedTd0Evaluator(StepSchedule sched) : sched_(sched) {}
    EvalResult evaluate(const FactoredMdp& m, const JointPolicy& zhat, const Trajectory& traj,
                        int beta) override {
        EvalResult r;
        r.qs = localized_td0(m, zhat, traj, beta, sched_);
        r.notes = "td0 over " + std::to_string(traj.T) + " transitions";
        return r;
    }
    std::string kind() const override { return "localized-td0"; }

private:
    StepSchedule sched_;
};

// Exact replacement for the TD step, for oracle tests and debugging: computes
// each agent's exact local Q under the behavior policy and truncates it by
// point mass at the defaults. Ignores the trajectory. Exact when beta reaches
// the diameter; otherwise exact up to the truncation error.
class ExactOracleEvaluator : public PolicyEvaluator {
public:
    explicit ExactOracleEvaluator(ExactOptions opts = {}) : opts_(opts) {}
    EvalResult evaluate(const FactoredMdp& m, const JointPolicy& zhat, const Trajectory&,
                        int beta) override {
        EvalResult r;
        for (int i = 0; i < m.n(); ++i)
            r.qs.push_back(truncate_local_q(m, local_q(m, zhat, i, opts_), beta));
        r.notes = "exact local q, point-mass truncation";
        return r;
    }
    std::string kind() const override { return "exact-oracle"; }

private:
    ExactOptions opts_;
};

struct AggregatedQ {
    int agent = 0;
    int kappa = 0;
    std::vector<int> members;  // kappa-hop neighborhood
    SubsetCodec s_codec;       // member states
    SubsetCodec a_codec;       // member actions (own action included)
    std::vector<double> table; // [s_idx * a_codec.size + a_idx]
};

// Mean of the neighborhood's truncated Q tables, each evaluated at this
// agent's kappa-hop view extended by defaults.
inline AggregatedQ aggregate_q(const FactoredMdp& m, const std::vector<TruncatedQ>& tqs, int agent,
                               int kappa) {
    if (int(tqs.size()) != m.n())
        throw std::invalid_argument("aggregate q: need one truncated table per agent");
    AggregatedQ agg;
    agg.agent = agent;
    agg.kappa = kappa;
    agg.members = neighborhood(m.graph, agent, kappa);
    agg.s_codec = make_codec(agg.members, m.state_sizes);
    agg.a_codec = make_codec(agg.members, m.action_sizes);
    agg.table.assign(std::size_t(agg.s_codec.size * agg.a_codec.size), 0.0);
    const double w = 1.0 / m.n();
    for (int j : agg.members) {
        const TruncatedQ& q = tqs[j];
        auto smap = map_subset_index(agg.s_codec, q.s_codec, m.default_state);
        auto amap = map_subset_index(agg.a_codec, q.a_codec, m.default_action);
        for (std::int64_t cs = 0; cs < agg.s_codec.size; ++cs) {
            double* out = agg.table.data() + std::size_t(cs * agg.a_codec.size);
            const double* src = q.table.data() + std::size_t(smap[std::size_t(cs)] * q.a_codec.size);
            for (std::int64_t ca = 0; ca < agg.a_codec.size; ++ca)
                out[ca] += w * src[std::size_t(amap[std::size_t(ca)])];
        }
    }
    return agg;
}

// Soft policy improvement: p_max synchronous multiplicative-weights updates
// from the uniform kappa-hop policy,
//   pi_i^{p+1}(a_i|s) proportional to pi_i^p(a_i|s)^{1-eta tau}
//                     * exp(eta E_{neighbors' actions ~ their rows}[aggregated Q]),
// where each neighbor's row is looked up at this view extended by defaults.
inline JointPolicy soft_policy_improvement(const FactoredMdp& m, const JointPolicy& zhat,
                                           const std::vector<TruncatedQ>& tqs, int kappa,
                                           double eta, double tau, int p_max) {
    if (eta * tau > 1.0 + 1e-12)
        throw std::invalid_argument("soft improvement: eta * tau must be <= 1");
    if (!(eta > 0.0)) throw std::invalid_argument("soft improvement: eta must be positive");
    if (p_max < 0) throw std::invalid_argument("soft improvement: negative p_max");
    (void)zhat;  // the behavior policy enters through tqs; improvement restarts from uniform

    JointPolicy pi = uniform_policy(m, kappa);
    const int n = m.n();

    std::vector<AggregatedQ> agg;
    agg.reserve(std::size_t(n));
    for (int i = 0; i < n; ++i) agg.push_back(aggregate_q(m, tqs, i, kappa));

    // neighbor row lookups per aggregated row, and the own-action digit
    std::vector<std::vector<std::vector<std::int64_t>>> rowmaps;
    rowmaps.resize(std::size_t(n));
    for (int i = 0; i < n; ++i)
        for (int l : agg[i].members)
            rowmaps[std::size_t(i)].push_back(
                map_subset_index(agg[i].s_codec, pi[l].codec, m.default_state));

    int max_act = 0;
    for (int a : m.action_sizes) max_act = std::max(max_act, a);
    std::vector<double> ones(std::size_t(max_act), 1.0);
    const bool keep_prior = eta * tau < 1.0 - 1e-12;

    JointPolicy next = pi;
    std::vector<const double*> rows;
    std::vector<double> mexp;
    for (int p = 0; p < p_max; ++p) {
        for (int i = 0; i < n; ++i) {
            const AggregatedQ& g = agg[i];
            const int k = int(g.members.size());
            int pos_i = 0;
            while (g.members[pos_i] != i) ++pos_i;
            const std::int64_t stride_i = g.a_codec.strides[pos_i];
            const int Ai = m.action_sizes[i];
            rows.resize(std::size_t(k));
            mexp.assign(std::size_t(Ai), 0.0);
            std::vector<int> asz = g.a_codec.sizes;
            for (std::int64_t r = 0; r < g.s_codec.size; ++r) {
                for (int c = 0; c < k; ++c) {
                    int l = g.members[c];
                    rows[std::size_t(c)] =
                        (l == i) ? ones.data()
                                 : pi[l].row(rowmaps[std::size_t(i)][std::size_t(c)][std::size_t(r)]);
                }
                std::fill(mexp.begin(), mexp.end(), 0.0);
                const double* qrow = g.table.data() + std::size_t(r * g.a_codec.size);
                for_each_weighted(rows, asz, [&](std::int64_t a, double w) {
                    mexp[std::size_t((a / stride_i) % Ai)] += w * qrow[std::size_t(a)];
                });
                const double* cur = pi[i].row(r);
                double* out = next[i].row(r);
                double shift = -std::numeric_limits<double>::infinity();
                for (int a = 0; a < Ai; ++a) {
                    double logit = eta * mexp[std::size_t(a)];
                    if (keep_prior)
                        logit += cur[a] > 0.0 ? (1.0 - eta * tau) * std::log(cur[a])
                                              : -std::numeric_limits<double>::infinity();
                    out[a] = logit;
                    shift = std::max(shift, logit);
                }
                for (int a = 0; a < Ai; ++a) out[a] = std::exp(out[a] - shift);
                renormalize_row(out, Ai);
            }
        }
        for (int i = 0; i < n; ++i) pi[i].table.swap(next[i].table);
    }
    return pi;
}

// Monte Carlo estimate of the entropy-regularized discounted return from the
// initial distribution; episodes are truncated where the discount weight
// drops below 1e-4.
inline double mc_return(const FactoredMdp& m, const JointPolicy& zeta, int episodes, Rng& rng) {
    if (episodes <= 0) throw std::invalid_argument("return estimate: need at least one episode");
    std::int64_t horizon =
        m.gamma == 0.0 ? 1 : std::int64_t(std::ceil(std::log(1e-4) / std::log(m.gamma)));
    double total = 0.0;
    std::vector<int> s, a, s_next;
    for (int e = 0; e < episodes; ++e) {
        m.rho.sample(rng, s);
        double ret = 0.0, disc = 1.0;
        for (std::int64_t t = 0; t < horizon; ++t) {
            sample_action(zeta, s, rng, a);
            ret += disc * (m.global_reward(s, a) - m.tau * log_prob(zeta, s, a));
            disc *= m.gamma;
            if (t + 1 < horizon) {
                m.sample_step(s, a, rng, s_next);
                s.swap(s_next);
            }
        }
        total += ret;
    }
    return total / episodes;
}

struct RunMetrics {
    struct Row {
        int iteration = 0;
        double return_estimate = 0.0;
        double sigma_regularity = 0.0;
        double wall_seconds = 0.0;  // informational only; never written to CSV
        double exact_j = std::numeric_limits<double>::quiet_NaN();
        double value_gap = std::numeric_limits<double>::quiet_NaN();
    };
    std::vector<Row> rows;
    std::vector<std::string> warnings;
    std::string eval_kind;
};

struct LpiResult {
    JointPolicy policy;
    RunMetrics metrics;
};

inline std::unique_ptr<PolicyEvaluator> make_evaluator(const FactoredMdp& m, const LPIConfig& cfg) {
    if (cfg.eval_kind == "localized-td0") {
        StepSchedule s;
        if (cfg.td_schedule == "constant")
            s = make_constant_schedule(cfg.td_alpha, cfg.td_anneal_every, cfg.td_anneal_factor);
        else if (cfg.td_schedule == "polynomial")
            s = make_polynomial_schedule(m.gamma, cfg.td_xi, cfg.T, cfg.td_k2);
        else
            throw std::invalid_argument("unknown td schedule: " + cfg.td_schedule);
        return std::make_unique<LocalizedTd0Evaluator>(s);
    }
    if (cfg.eval_kind == "exact-oracle") {
        ExactOptions o;
        o.tol = cfg.exact_tol;
        o.cap = cfg.cap;
        return std::make_unique<ExactOracleEvaluator>(o);
    }
    throw std::invalid_argument("unknown evaluator kind: " + cfg.eval_kind);
}

inline LpiResult lpi_run(const FactoredMdp& m, const LPIConfig& cfg, PolicyEvaluator& evaluator) {
    if (cfg.kappa < 0 || cfg.beta < 0)
        throw std::invalid_argument("lpi: kappa and beta must be nonnegative");
    if (cfg.M < 0 || cfg.T < 0) throw std::invalid_argument("lpi: M and T must be nonnegative");
    if (std::abs(cfg.tau - m.tau) > 1e-12)
        throw std::invalid_argument("lpi: config tau differs from the instance tau");
    double eta = cfg.eta > 0.0 ? cfg.eta : (m.tau > 0.0 ? 1.0 / m.tau : 0.0);
    if (!(eta > 0.0)) throw std::invalid_argument("lpi: eta unset and tau is zero");

    LpiResult res;
    res.metrics.eval_kind = evaluator.kind();
    if (cfg.kappa > cfg.beta)
        res.metrics.warnings.push_back("kappa > beta: policies condition on states the "
                                       "evaluation never observes; defaults fill the gap");

    ValueTable v_star;
    bool exact_ok = false;
    if (cfg.exact_metrics) {
        if (m.n_pairs() <= cfg.cap) {
            ExactOptions o;
            o.tol = cfg.exact_tol;
            o.cap = cfg.cap;
            v_star = optimal_value(m, o).v_star;
            exact_ok = true;
        } else {
            res.metrics.warnings.push_back("exact metrics requested but the instance exceeds "
                                           "the state-action cap; skipping them");
        }
    }

    JointPolicy zhat = uniform_policy(m, cfg.kappa);
    auto t_start = std::chrono::steady_clock::now();
    auto record = [&](int iteration) {
        RunMetrics::Row row;
        row.iteration = iteration;
        Rng rng(derive_seed(cfg.seed, {0xE57u, std::uint64_t(iteration)}));
        row.return_estimate = mc_return(m, zhat, cfg.return_episodes, rng);
        row.sigma_regularity = sigma_regularity(zhat);
        row.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
        if (exact_ok) {
            ExactOptions o;
            o.tol = cfg.exact_tol;
            o.cap = cfg.cap;
            ValueTable v = policy_value(m, zhat, o);
            row.exact_j = objective(m, v);
            row.value_gap = sup_diff(v, v_star);
        }
        res.metrics.rows.push_back(row);
    };

    record(0);
    for (int it = 0; it < cfg.M; ++it) {
        Rng rng(derive_seed(cfg.seed, {0x7Au, std::uint64_t(it)}));
        Trajectory traj = collect_trajectory(m, zhat, cfg.T, rng);
        EvalResult ev = evaluator.evaluate(m, zhat, traj, cfg.beta);
        zhat = soft_policy_improvement(m, zhat, ev.qs, cfg.kappa, eta, m.tau, cfg.p_max);
        record(it + 1);
    }
    res.policy = std::move(zhat);
    return res;
}

}  // namespace lpi
