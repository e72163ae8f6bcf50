#pragma once

// Exact (enumeration-based) solvers for small instances: policy evaluation,
// the entropy-regularized Bellman optimality operator with a multiplicative
// weights inner solve over the product simplex, exact policy iteration, and
// stationary distributions of the induced state-action chain. Everything here
// enumerates joint spaces and is guarded by a hard cap on state-action pairs;
// oversized instances are refused rather than left to crawl.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpi/mdp.hpp"
#include "lpi/policy.hpp"
#include "lpi/qtable.hpp"

namespace lpi {

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExactOptions {
    double tol = 1e-9;
    std::int64_t cap = std::int64_t(1) << 20;         // max state-action pairs
    std::int64_t mw_budget = 10000;                   // MW iterations per state
    std::int64_t stationary_cap = std::int64_t(1) << 14;  // pairs for chain analysis
    double eta = -1.0;                                // MW step; <=0 means 1/tau
};

using ValueTable = std::vector<double>;  // indexed by global state

// Enumerates all joint indices of a mixed-radix space where digit k carries a
// weight row; calls f(joint_index, product_of_weights). Digit 0 is fastest,
// matching SubsetCodec.
template <class F>
inline void for_each_weighted(const std::vector<const double*>& rows, const std::vector<int>& sizes,
                              F&& f) {
    int k = int(sizes.size());
    if (k == 0) {
        f(std::int64_t(0), 1.0);
        return;
    }
    std::vector<int> digit(k, 0);
    std::vector<double> suffix(k + 1);
    suffix[k] = 1.0;
    for (int j = k - 1; j >= 0; --j) suffix[j] = rows[j][0] * suffix[j + 1];
    std::int64_t total = 1;
    for (int s : sizes) total *= s;
    for (std::int64_t idx = 0;; ++idx) {
        f(idx, suffix[0]);
        if (idx + 1 == total) break;
        int p = 0;
        while (digit[p] + 1 == sizes[p]) digit[p++] = 0;
        ++digit[p];
        for (int j = p; j >= 0; --j) suffix[j] = rows[j][digit[j]] * suffix[j + 1];
    }
}

inline double sup_diff(const std::vector<double>& a, const std::vector<double>& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

namespace detail {

// per-agent policy row index for every global state
inline std::vector<std::vector<std::int64_t>> row_maps(const FactoredMdp& m, const JointPolicy& zeta) {
    std::vector<std::vector<std::int64_t>> maps(m.n());
    std::vector<int> tuple;
    for (int i = 0; i < m.n(); ++i) {
        maps[i].resize(std::size_t(m.n_states()));
        for (std::int64_t s = 0; s < m.n_states(); ++s) {
            m.state_codec.decode(s, tuple);
            maps[i][std::size_t(s)] = zeta[i].codec.encode_global(tuple);
        }
    }
    return maps;
}

// Dense next-state rows for every (s, a); the factored kernels are multiplied
// out once so value sweeps are plain dot products.
struct GlobalDynamics {
    const FactoredMdp* m;
    std::int64_t S, A;
    std::vector<double> rows;     // [(s*A + a) * S + s_next] when cached
    bool cached = false;

    explicit GlobalDynamics(const FactoredMdp& mdp, std::int64_t work_cap = std::int64_t(1) << 24)
        : m(&mdp), S(mdp.n_states()), A(mdp.n_actions()) {
        if (S * A * S <= work_cap) {
            rows.resize(std::size_t(S * A) * std::size_t(S));
            fill_rows();
            cached = true;
        }
    }

    void fill_rows() {
        std::vector<int> s_tuple, a_tuple;
        std::vector<const double*> krows(m->n());
        std::vector<int> sizes = m->state_sizes;
        for (std::int64_t s = 0; s < S; ++s) {
            m->state_codec.decode(s, s_tuple);
            for (std::int64_t a = 0; a < A; ++a) {
                m->action_codec.decode(a, a_tuple);
                for (int i = 0; i < m->n(); ++i)
                    krows[i] = m->kernel_row(i, m->nbr_codec[i].encode_global(s_tuple), a_tuple[i]);
                double* out = rows.data() + std::size_t(s * A + a) * std::size_t(S);
                for_each_weighted(krows, sizes, [&](std::int64_t sn, double p) { out[sn] = p; });
            }
        }
    }

    double expected_value(std::int64_t s, std::int64_t a, const ValueTable& v) const {
        if (cached) {
            const double* row = rows.data() + std::size_t(s * A + a) * std::size_t(S);
            double acc = 0.0;
            for (std::int64_t sn = 0; sn < S; ++sn) acc += row[sn] * v[std::size_t(sn)];
            return acc;
        }
        std::vector<int> s_tuple, a_tuple;
        m->state_codec.decode(s, s_tuple);
        m->action_codec.decode(a, a_tuple);
        std::vector<const double*> krows(m->n());
        for (int i = 0; i < m->n(); ++i)
            krows[i] = m->kernel_row(i, m->nbr_codec[i].encode_global(s_tuple), a_tuple[i]);
        double acc = 0.0;
        for_each_weighted(krows, m->state_sizes,
                          [&](std::int64_t sn, double p) { acc += p * v[std::size_t(sn)]; });
        return acc;
    }

    double prob(std::int64_t s, std::int64_t a, std::int64_t s_next) const {
        if (cached) return rows[std::size_t(s * A + a) * std::size_t(S) + std::size_t(s_next)];
        std::vector<int> s_tuple, a_tuple, n_tuple;
        m->state_codec.decode(s, s_tuple);
        m->action_codec.decode(a, a_tuple);
        m->state_codec.decode(s_next, n_tuple);
        double p = 1.0;
        for (int i = 0; i < m->n(); ++i)
            p *= m->local_transition_prob(i, s_tuple, a_tuple[i], n_tuple[i]);
        return p;
    }
};

inline std::vector<double> global_rewards(const FactoredMdp& m) {
    std::vector<double> r(std::size_t(m.n_states() * m.n_actions()), 0.0);
    std::vector<int> s_tuple, a_tuple;
    for (std::int64_t s = 0; s < m.n_states(); ++s) {
        m.state_codec.decode(s, s_tuple);
        for (std::int64_t a = 0; a < m.n_actions(); ++a) {
            m.action_codec.decode(a, a_tuple);
            r[std::size_t(s * m.n_actions() + a)] = m.global_reward(s_tuple, a_tuple);
        }
    }
    return r;
}

inline std::int64_t sweep_budget(double gamma, double tol, double v_max) {
    if (gamma <= 0.0) return 2;
    double target = tol * (1.0 - gamma) / std::max(v_max, 1e-300);
    if (target >= 1.0) return 2;
    return std::int64_t(std::ceil(std::log(target) / std::log(gamma))) + 10;
}

}  // namespace detail

// Value of a joint kappa-hop policy: fixed point of
//   V(s) = E_a[r(s,a) + gamma E V(s')] + tau * sum_i H(zeta_i(.|s)).
inline ValueTable policy_value(const FactoredMdp& m, const JointPolicy& zeta,
                               const ExactOptions& opts = {}) {
    m.require_pairs_cap(opts.cap, "exact policy evaluation");
    const std::int64_t S = m.n_states(), A = m.n_actions();
    auto maps = detail::row_maps(m, zeta);
    detail::GlobalDynamics dyn(m);
    auto rew = detail::global_rewards(m);

    // joint action weights and entropy term per state
    std::vector<double> w(std::size_t(S * A), 0.0);
    std::vector<double> ent(std::size_t(S), 0.0);
    std::vector<const double*> prow(m.n());
    for (std::int64_t s = 0; s < S; ++s) {
        for (int i = 0; i < m.n(); ++i) {
            prow[i] = zeta[i].row(maps[i][std::size_t(s)]);
            ent[std::size_t(s)] += row_entropy(prow[i], m.action_sizes[i]);
        }
        for_each_weighted(prow, m.action_sizes,
                          [&](std::int64_t a, double p) { w[std::size_t(s * A + a)] = p; });
    }

    double v_max = m.r_bar;
    for (int i = 0; i < m.n(); ++i) v_max += m.tau * std::log(double(m.action_sizes[i]));
    v_max /= std::max(1.0 - m.gamma, 1e-12);
    std::int64_t budget = detail::sweep_budget(m.gamma, opts.tol, v_max);

    ValueTable v(std::size_t(S), 0.0), next(std::size_t(S), 0.0);
    for (std::int64_t it = 0; it < budget; ++it) {
        for (std::int64_t s = 0; s < S; ++s) {
            double acc = 0.0;
            for (std::int64_t a = 0; a < A; ++a) {
                double ws = w[std::size_t(s * A + a)];
                if (ws == 0.0) continue;
                acc += ws * (rew[std::size_t(s * A + a)] + m.gamma * dyn.expected_value(s, a, v));
            }
            next[std::size_t(s)] = acc + m.tau * ent[std::size_t(s)];
        }
        double change = sup_diff(next, v);
        v.swap(next);
        if (change <= opts.tol * (1.0 - m.gamma) || m.gamma == 0.0) return v;
    }
    throw NumericalError("exact policy evaluation: sweep budget exhausted");
}

// Agent i's value: fixed point of
//   V_i(s) = E_a[r_i(s_i,a_i) + gamma E V_i(s')] + n tau H(zeta_i(.|s)).
inline ValueTable local_policy_value(const FactoredMdp& m, const JointPolicy& zeta, int agent,
                                     const ExactOptions& opts = {}) {
    m.require_pairs_cap(opts.cap, "exact local policy evaluation");
    const std::int64_t S = m.n_states(), A = m.n_actions();
    auto maps = detail::row_maps(m, zeta);
    detail::GlobalDynamics dyn(m);

    std::vector<double> w(std::size_t(S * A), 0.0);
    std::vector<double> rloc(std::size_t(S * A), 0.0);
    std::vector<double> ent(std::size_t(S), 0.0);
    std::vector<const double*> prow(m.n());
    std::vector<int> s_tuple, a_tuple;
    for (std::int64_t s = 0; s < S; ++s) {
        m.state_codec.decode(s, s_tuple);
        for (int i = 0; i < m.n(); ++i) prow[i] = zeta[i].row(maps[i][std::size_t(s)]);
        ent[std::size_t(s)] = row_entropy(prow[agent], m.action_sizes[agent]);
        for_each_weighted(prow, m.action_sizes,
                          [&](std::int64_t a, double p) { w[std::size_t(s * A + a)] = p; });
        for (std::int64_t a = 0; a < A; ++a) {
            m.action_codec.decode(a, a_tuple);
            rloc[std::size_t(s * A + a)] = m.local_reward(agent, s_tuple[agent], a_tuple[agent]);
        }
    }

    double v_max = (m.r_bar + m.n() * m.tau * std::log(double(m.action_sizes[agent]))) /
                   std::max(1.0 - m.gamma, 1e-12);
    std::int64_t budget = detail::sweep_budget(m.gamma, opts.tol, std::max(v_max, 1.0));

    ValueTable v(std::size_t(S), 0.0), next(std::size_t(S), 0.0);
    for (std::int64_t it = 0; it < budget; ++it) {
        for (std::int64_t s = 0; s < S; ++s) {
            double acc = 0.0;
            for (std::int64_t a = 0; a < A; ++a) {
                double ws = w[std::size_t(s * A + a)];
                if (ws == 0.0) continue;
                acc += ws * (rloc[std::size_t(s * A + a)] + m.gamma * dyn.expected_value(s, a, v));
            }
            next[std::size_t(s)] = acc + m.n() * m.tau * ent[std::size_t(s)];
        }
        double change = sup_diff(next, v);
        v.swap(next);
        if (change <= opts.tol * (1.0 - m.gamma) || m.gamma == 0.0) return v;
    }
    throw NumericalError("exact local policy evaluation: sweep budget exhausted");
}

// Q_i(s,a) = r_i(s_i,a_i) + gamma E_{s'} V_i(s')
inline LocalQTable local_q(const FactoredMdp& m, const JointPolicy& zeta, int agent,
                           const ExactOptions& opts = {}) {
    ValueTable vi = local_policy_value(m, zeta, agent, opts);
    const std::int64_t S = m.n_states(), A = m.n_actions();
    detail::GlobalDynamics dyn(m);
    LocalQTable q;
    q.agent = agent;
    q.table.resize(std::size_t(S * A));
    std::vector<int> s_tuple, a_tuple;
    for (std::int64_t s = 0; s < S; ++s) {
        m.state_codec.decode(s, s_tuple);
        for (std::int64_t a = 0; a < A; ++a) {
            m.action_codec.decode(a, a_tuple);
            q.table[std::size_t(s * A + a)] =
                m.local_reward(agent, s_tuple[agent], a_tuple[agent]) +
                m.gamma * dyn.expected_value(s, a, vi);
        }
    }
    return q;
}

struct BellmanResult {
    ValueTable value;       // T V
    JointPolicy maximizer;  // per-state product-simplex argmax, radius = diameter
    std::int64_t mw_iterations_max = 0;
};

// One application of the regularized optimality operator
//   [T V](s) = max over product policies of E[r - tau log pi(a) + gamma E V(s')],
// solved per state by multiplicative weights with step eta (default 1/tau).
// For a single agent the closed form tau * log sum_a exp(Q/tau) is used and
// cross-checked against the iterative path.
inline BellmanResult bellman_optimal_apply(const FactoredMdp& m, const ValueTable& v,
                                           const ExactOptions& opts = {}) {
    m.require_pairs_cap(opts.cap, "bellman operator");
    if (!(m.tau > 0.0))
        throw std::invalid_argument("bellman operator: needs tau > 0 for the entropy term");
    double eta = opts.eta > 0.0 ? opts.eta : 1.0 / m.tau;
    if (eta * m.tau > 1.0 + 1e-12)
        throw std::invalid_argument("bellman operator: eta * tau must be <= 1");

    const std::int64_t S = m.n_states(), A = m.n_actions();
    detail::GlobalDynamics dyn(m);
    auto rew = detail::global_rewards(m);

    BellmanResult res;
    res.value.resize(std::size_t(S));
    for (int i = 0; i < m.n(); ++i)
        res.maximizer.push_back(uniform_local_policy(m, i, m.graph.diameter));

    std::vector<double> qv(std::size_t(A), 0.0);
    int max_act = *std::max_element(m.action_sizes.begin(), m.action_sizes.end());
    std::vector<double> ones(std::size_t(max_act), 1.0);
    std::vector<std::vector<double>> pi(m.n()), pi_next(m.n()), exp_q(m.n());
    std::vector<const double*> rows(m.n());
    std::vector<int> a_tuple;

    for (std::int64_t s = 0; s < S; ++s) {
        for (std::int64_t a = 0; a < A; ++a)
            qv[std::size_t(a)] = rew[std::size_t(s * A + a)] + m.gamma * dyn.expected_value(s, a, v);

        for (int i = 0; i < m.n(); ++i) {
            pi[i].assign(std::size_t(m.action_sizes[i]), 1.0 / m.action_sizes[i]);
            pi_next[i].resize(std::size_t(m.action_sizes[i]));
            exp_q[i].resize(std::size_t(m.action_sizes[i]));
        }

        std::int64_t it = 0;
        for (;; ++it) {
            if (it >= opts.mw_budget)
                throw NumericalError("bellman operator: inner solve exceeded budget at state " +
                                     std::to_string(s));
            // expected Q over the other agents' current mixtures
            for (int i = 0; i < m.n(); ++i) {
                std::fill(exp_q[i].begin(), exp_q[i].end(), 0.0);
                for (int j = 0; j < m.n(); ++j) rows[j] = (j == i) ? ones.data() : pi[j].data();
                const std::int64_t stride = m.action_codec.strides[i];
                const int sz = m.action_sizes[i];
                for_each_weighted(rows, m.action_sizes, [&](std::int64_t a, double p) {
                    exp_q[i][std::size_t((a / stride) % sz)] += p * qv[std::size_t(a)];
                });
            }
            double delta = 0.0;
            for (int i = 0; i < m.n(); ++i) {
                int sz = m.action_sizes[i];
                double shift = -std::numeric_limits<double>::infinity();
                for (int a = 0; a < sz; ++a) {
                    double logit = eta * exp_q[i][a];
                    if (eta * m.tau < 1.0) {
                        logit += pi[i][a] > 0.0 ? (1.0 - eta * m.tau) * std::log(pi[i][a])
                                                : -std::numeric_limits<double>::infinity();
                    }
                    pi_next[i][a] = logit;
                    shift = std::max(shift, logit);
                }
                double z = 0.0;
                for (int a = 0; a < sz; ++a) {
                    pi_next[i][a] = std::exp(pi_next[i][a] - shift);
                    z += pi_next[i][a];
                }
                for (int a = 0; a < sz; ++a) pi_next[i][a] /= z;
                delta = std::max(delta, total_variation(pi_next[i].data(), pi[i].data(), sz));
            }
            for (int i = 0; i < m.n(); ++i) pi[i].swap(pi_next[i]);
            if (delta <= opts.tol) break;
        }
        res.mw_iterations_max = std::max(res.mw_iterations_max, it + 1);

        double attained = 0.0;
        for (int i = 0; i < m.n(); ++i) {
            rows[i] = pi[i].data();
            attained += m.tau * row_entropy(pi[i].data(), m.action_sizes[i]);
        }
        double eq = 0.0;
        for_each_weighted(rows, m.action_sizes,
                          [&](std::int64_t a, double p) { eq += p * qv[std::size_t(a)]; });
        attained += eq;

        if (m.n() == 1) {
            // closed form, and a consistency check on the iterative route
            double mx = *std::max_element(qv.begin(), qv.end());
            double lse = 0.0;
            for (std::int64_t a = 0; a < A; ++a) lse += std::exp((qv[std::size_t(a)] - mx) / m.tau);
            double closed = mx + m.tau * std::log(lse);
            if (std::abs(closed - attained) > 100.0 * opts.tol * std::max(1.0, std::abs(closed)))
                throw NumericalError("bellman operator: closed form and iterative solve disagree");
            attained = closed;
            double z = 0.0;
            for (std::int64_t a = 0; a < A; ++a) {
                pi[0][std::size_t(a)] = std::exp((qv[std::size_t(a)] - mx) / m.tau);
                z += pi[0][std::size_t(a)];
            }
            for (std::int64_t a = 0; a < A; ++a) pi[0][std::size_t(a)] /= z;
        }

        res.value[std::size_t(s)] = attained;
        for (int i = 0; i < m.n(); ++i) {
            double* out = res.maximizer[i].row(s);
            for (int a = 0; a < m.action_sizes[i]; ++a) out[a] = pi[i][a];
            renormalize_row(out, m.action_sizes[i]);
        }
    }
    return res;
}

struct OptimalValueResult {
    ValueTable v_star;
    std::int64_t iterations = 0;
};

inline OptimalValueResult optimal_value(const FactoredMdp& m, const ExactOptions& opts = {}) {
    m.require_pairs_cap(opts.cap, "value iteration");
    double v_max = m.r_bar;
    for (int i = 0; i < m.n(); ++i) v_max += m.tau * std::log(double(m.action_sizes[i]));
    v_max /= std::max(1.0 - m.gamma, 1e-12);
    std::int64_t budget = detail::sweep_budget(m.gamma, opts.tol, v_max);

    OptimalValueResult res;
    res.v_star.assign(std::size_t(m.n_states()), 0.0);
    for (std::int64_t it = 0; it < budget; ++it) {
        ValueTable next = bellman_optimal_apply(m, res.v_star, opts).value;
        double change = sup_diff(next, res.v_star);
        res.v_star.swap(next);
        res.iterations = it + 1;
        if (change <= opts.tol * (1.0 - m.gamma) || m.gamma == 0.0) return res;
    }
    throw NumericalError("value iteration: sweep budget exhausted");
}

struct PolicyIterationResult {
    JointPolicy policy;             // final iterate
    std::vector<double> trace;      // ||V^{zeta_m} - V*||_inf for m = 0..M
    ValueTable v_star;
};

// Exact policy iteration: evaluate the current policy exactly, then replace it
// with the per-state product-simplex maximizer. Starts from uniform.
inline PolicyIterationResult exact_policy_iteration(const FactoredMdp& m, int iterations,
                                                    const ExactOptions& opts = {}) {
    if (iterations < 0) throw std::invalid_argument("policy iteration: negative iteration count");
    PolicyIterationResult res;
    res.v_star = optimal_value(m, opts).v_star;
    res.policy = uniform_policy(m, m.graph.diameter);
    for (int it = 0;; ++it) {
        ValueTable v = policy_value(m, res.policy, opts);
        res.trace.push_back(sup_diff(v, res.v_star));
        if (it == iterations) break;
        res.policy = bellman_optimal_apply(m, v, opts).maximizer;
    }
    return res;
}

// J = E_{s ~ rho} V(s)
inline double objective(const FactoredMdp& m, const ValueTable& v) {
    double j = 0.0;
    std::vector<int> tuple;
    for (std::int64_t s = 0; s < m.n_states(); ++s) {
        m.state_codec.decode(s, tuple);
        j += m.rho.density(tuple) * v[std::size_t(s)];
    }
    return j;
}

struct StationaryResult {
    std::vector<double> dist;  // over pairs, index s * |A| + a
    bool irreducible = false;
    std::int64_t recurrent_size = 0;
    std::int64_t iterations = 0;
};

// Stationary distribution of the state-action chain z -> z' with
// P(z'|z) = P(s'|s,a) zeta(a'|s'). Requires a unique aperiodic recurrent
// class; transient states are allowed and end up with zero mass. Multiple
// recurrent classes or a periodic one raise a diagnostic error.
inline StationaryResult stationary_distribution(const FactoredMdp& m, const JointPolicy& zeta,
                                                const ExactOptions& opts = {}) {
    const std::int64_t S = m.n_states(), A = m.n_actions(), Z = S * A;
    if (Z > opts.stationary_cap)
        throw CapError("stationary distribution: " + std::to_string(Z) +
                       " state-action pairs exceed the chain-analysis cap " +
                       std::to_string(opts.stationary_cap));
    auto maps = detail::row_maps(m, zeta);
    detail::GlobalDynamics dyn(m);

    // successor lists with probabilities
    std::vector<std::vector<std::pair<std::int32_t, double>>> succ;
    succ.resize(std::size_t(Z));
    for (std::int64_t s = 0; s < S; ++s)
        for (std::int64_t a = 0; a < A; ++a) {
            auto& edges = succ[std::size_t(s * A + a)];
            for (std::int64_t sn = 0; sn < S; ++sn) {
                double ps = dyn.prob(s, a, sn);
                if (ps <= 0.0) continue;
                // expand over next actions with positive policy mass
                std::vector<const double*> prow(m.n());
                for (int i = 0; i < m.n(); ++i) prow[i] = zeta[i].row(maps[i][std::size_t(sn)]);
                for_each_weighted(prow, m.action_sizes, [&](std::int64_t an, double pa) {
                    if (pa > 0.0) edges.push_back({std::int32_t(sn * A + an), ps * pa});
                });
            }
        }

    // strongly connected components (Kosaraju, iterative)
    std::vector<std::int32_t> order;
    order.reserve(std::size_t(Z));
    {
        std::vector<char> seen(std::size_t(Z), 0);
        std::vector<std::pair<std::int32_t, std::size_t>> stack;
        for (std::int32_t start = 0; start < Z; ++start) {
            if (seen[std::size_t(start)]) continue;
            stack.push_back({start, 0});
            seen[std::size_t(start)] = 1;
            while (!stack.empty()) {
                auto& [u, k] = stack.back();
                if (k < succ[std::size_t(u)].size()) {
                    std::int32_t v = succ[std::size_t(u)][k++].first;
                    if (!seen[std::size_t(v)]) {
                        seen[std::size_t(v)] = 1;
                        stack.push_back({v, 0});
                    }
                } else {
                    order.push_back(u);
                    stack.pop_back();
                }
            }
        }
    }
    std::vector<std::vector<std::int32_t>> pred;
    pred.resize(std::size_t(Z));
    for (std::int32_t u = 0; u < Z; ++u)
        for (auto& [v, p] : succ[std::size_t(u)]) pred[std::size_t(v)].push_back(u);
    std::vector<std::int32_t> comp(std::size_t(Z), -1);
    std::int32_t n_comp = 0;
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (comp[std::size_t(*it)] >= 0) continue;
        std::vector<std::int32_t> stack = {*it};
        comp[std::size_t(*it)] = n_comp;
        while (!stack.empty()) {
            std::int32_t u = stack.back();
            stack.pop_back();
            for (std::int32_t v : pred[std::size_t(u)])
                if (comp[std::size_t(v)] < 0) {
                    comp[std::size_t(v)] = n_comp;
                    stack.push_back(v);
                }
        }
        ++n_comp;
    }
    // closed components = recurrent classes
    std::vector<char> closed(std::size_t(n_comp), 1);
    for (std::int32_t u = 0; u < Z; ++u)
        for (auto& [v, p] : succ[std::size_t(u)])
            if (comp[std::size_t(u)] != comp[std::size_t(v)]) closed[std::size_t(comp[std::size_t(u)])] = 0;

    std::vector<std::int32_t> closed_comps;
    for (std::int32_t c = 0; c < n_comp; ++c)
        if (closed[std::size_t(c)]) closed_comps.push_back(c);
    if (closed_comps.size() != 1) {
        std::string msg = "stationary distribution: chain is reducible, found " +
                          std::to_string(closed_comps.size()) + " recurrent classes;";
        for (std::int32_t c : closed_comps) {
            for (std::int32_t u = 0; u < Z; ++u)
                if (comp[std::size_t(u)] == c) {
                    msg += " class with state " + std::to_string(u / A) + "/action " +
                           std::to_string(u % A) + ";";
                    break;
                }
        }
        throw NumericalError(msg);
    }

    std::int32_t rec = closed_comps[0];
    StationaryResult res;
    for (std::int32_t u = 0; u < Z; ++u)
        if (comp[std::size_t(u)] == rec) ++res.recurrent_size;
    res.irreducible = (res.recurrent_size == Z);

    // period of the recurrent class via BFS levels
    {
        std::int32_t root = -1;
        for (std::int32_t u = 0; u < Z && root < 0; ++u)
            if (comp[std::size_t(u)] == rec) root = u;
        std::vector<std::int64_t> level(std::size_t(Z), -1);
        std::vector<std::int32_t> queue = {root};
        level[std::size_t(root)] = 0;
        std::int64_t period = 0;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            std::int32_t u = queue[qi];
            for (auto& [v, p] : succ[std::size_t(u)]) {
                if (comp[std::size_t(v)] != rec) continue;
                if (level[std::size_t(v)] < 0) {
                    level[std::size_t(v)] = level[std::size_t(u)] + 1;
                    queue.push_back(v);
                } else {
                    period = std::gcd(period, std::abs(level[std::size_t(u)] + 1 - level[std::size_t(v)]));
                }
            }
        }
        if (period != 1)
            throw NumericalError("stationary distribution: recurrent class has period " +
                                 std::to_string(period) + " (state " + std::to_string(root / A) +
                                 " in the class)");
    }

    // power iteration
    std::vector<double> x(std::size_t(Z), 1.0 / double(Z)), next(std::size_t(Z), 0.0);
    const std::int64_t budget = 1000000;
    for (std::int64_t it = 0; it < budget; ++it) {
        std::fill(next.begin(), next.end(), 0.0);
        for (std::int64_t u = 0; u < Z; ++u) {
            double xu = x[std::size_t(u)];
            if (xu == 0.0) continue;
            for (auto& [v, p] : succ[std::size_t(u)]) next[std::size_t(v)] += xu * p;
        }
        double l1 = 0.0, total = 0.0;
        for (std::int64_t u = 0; u < Z; ++u) {
            l1 += std::abs(next[std::size_t(u)] - x[std::size_t(u)]);
            total += next[std::size_t(u)];
        }
        for (std::int64_t u = 0; u < Z; ++u) next[std::size_t(u)] /= total;  // guard drift
        x.swap(next);
        res.iterations = it + 1;
        if (l1 <= opts.tol) {
            res.dist = std::move(x);
            return res;
        }
    }
    throw NumericalError("stationary distribution: power iteration did not converge");
}

// Minimum beta-hop marginal mass: min over agents and over
// (beta-hop state, beta-hop action) cells of the stationary marginal.
inline double xi_min(const FactoredMdp& m, const std::vector<double>& dist, int beta) {
    const std::int64_t S = m.n_states(), A = m.n_actions();
    double best = std::numeric_limits<double>::infinity();
    std::vector<int> s_tuple, a_tuple;
    for (int i = 0; i < m.n(); ++i) {
        auto members = neighborhood(m.graph, i, beta);
        SubsetCodec sc = make_codec(members, m.state_sizes);
        SubsetCodec ac = make_codec(members, m.action_sizes);
        std::vector<double> marg(std::size_t(sc.size * ac.size), 0.0);
        for (std::int64_t s = 0; s < S; ++s) {
            m.state_codec.decode(s, s_tuple);
            std::int64_t cs = sc.encode_global(s_tuple);
            for (std::int64_t a = 0; a < A; ++a) {
                m.action_codec.decode(a, a_tuple);
                marg[std::size_t(cs + sc.size * ac.encode_global(a_tuple))] +=
                    dist[std::size_t(s * A + a)];
            }
        }
        for (double p : marg) best = std::min(best, p);
    }
    return best;
}

}  // namespace lpi
