#pragma once

// Networked MDP with factored dynamics: each agent i carries a finite local
// state and action, its next-state kernel reads only the 1-hop neighborhood
// state plus its own action, and the stage reward is the mean of local
// rewards r_i(s_i, a_i). Entropy regularization weight tau and discount gamma
// live here because they define the objective, not the algorithm.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpi/codec.hpp"
#include "lpi/graph.hpp"
#include "lpi/rng.hpp"

namespace lpi {

struct CapError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Initial state distribution as a mixture of product distributions. Covers
// uniform starts, per-agent product starts, and seeded mixtures (one agent
// singled out per component) without ever materializing the joint space.
struct InitialDist {
    std::vector<double> weights;                          // one per component
    std::vector<std::vector<std::vector<double>>> comps;  // [comp][agent][local state]

    static InitialDist uniform(const std::vector<int>& state_sizes) {
        InitialDist d;
        d.weights = {1.0};
        d.comps.resize(1);
        for (int sz : state_sizes)
            d.comps[0].push_back(std::vector<double>(sz, 1.0 / sz));
        return d;
    }

    void validate(const std::vector<int>& state_sizes) const {
        if (weights.empty() || weights.size() != comps.size())
            throw std::invalid_argument("initial dist: component/weight mismatch");
        double wsum = 0.0;
        for (double w : weights) {
            if (w < 0) throw std::invalid_argument("initial dist: negative weight");
            wsum += w;
        }
        if (std::abs(wsum - 1.0) > 1e-9)
            throw std::invalid_argument("initial dist: weights must sum to 1");
        for (const auto& comp : comps) {
            if (comp.size() != state_sizes.size())
                throw std::invalid_argument("initial dist: wrong agent count in component");
            for (std::size_t i = 0; i < comp.size(); ++i) {
                if (int(comp[i].size()) != state_sizes[i])
                    throw std::invalid_argument("initial dist: wrong local support size");
                double s = 0.0;
                for (double p : comp[i]) {
                    if (p < 0) throw std::invalid_argument("initial dist: negative probability");
                    s += p;
                }
                if (std::abs(s - 1.0) > 1e-9)
                    throw std::invalid_argument("initial dist: local factor must sum to 1");
            }
        }
    }

    void sample(Rng& rng, std::vector<int>& out) const {
        int c = int(weights.size()) == 1 ? 0 : rng.categorical(weights);
        out.resize(comps[c].size());
        for (std::size_t i = 0; i < comps[c].size(); ++i) out[i] = rng.categorical(comps[c][i]);
    }

    double density(const std::vector<int>& s) const {
        double total = 0.0;
        for (std::size_t c = 0; c < weights.size(); ++c) {
            double p = weights[c];
            for (std::size_t i = 0; i < s.size(); ++i) p *= comps[c][i][s[i]];
            total += p;
        }
        return total;
    }
};

struct FactoredMdp {
    NetworkGraph graph;
    std::vector<int> state_sizes;   // |S_i|
    std::vector<int> action_sizes;  // |A_i|
    double gamma = 0.9;
    double tau = 0.0;
    double r_bar = 1.0;

    // kernel rows: kernels[i][(nbr_state_idx * |A_i| + a_i) * |S_i| + s_next]
    std::vector<std::vector<double>> kernels;
    std::vector<SubsetCodec> nbr_codec;  // closed 1-hop neighborhood of each agent

    // rewards[i][s_i * |A_i| + a_i], each in [0, r_bar]
    std::vector<std::vector<double>> rewards;

    std::vector<int> default_state;   // all zeros unless an instance says otherwise
    std::vector<int> default_action;
    InitialDist rho;

    SubsetCodec state_codec;   // all agents, state digits
    SubsetCodec action_codec;  // all agents, action digits

    int n() const { return graph.n; }
    std::int64_t n_states() const { return state_codec.size; }
    std::int64_t n_actions() const { return action_codec.size; }
    std::int64_t n_pairs() const { return state_codec.size * action_codec.size; }

    double local_reward(int i, int s_i, int a_i) const {
        return rewards[i][std::size_t(s_i) * action_sizes[i] + a_i];
    }

    double global_reward(const std::vector<int>& s, const std::vector<int>& a) const {
        double total = 0.0;
        for (int i = 0; i < n(); ++i) total += local_reward(i, s[i], a[i]);
        return total / n();
    }

    const double* kernel_row(int i, std::int64_t nbr_idx, int a_i) const {
        return kernels[i].data() + (nbr_idx * action_sizes[i] + a_i) * state_sizes[i];
    }

    double local_transition_prob(int i, const std::vector<int>& s, int a_i, int s_next) const {
        return kernel_row(i, nbr_codec[i].encode_global(s), a_i)[s_next];
    }

    double global_transition_prob(const std::vector<int>& s, const std::vector<int>& a,
                                  const std::vector<int>& s_next) const {
        double p = 1.0;
        for (int i = 0; i < n(); ++i) p *= local_transition_prob(i, s, a[i], s_next[i]);
        return p;
    }

    void sample_step(const std::vector<int>& s, const std::vector<int>& a, Rng& rng,
                     std::vector<int>& s_next) const {
        s_next.resize(std::size_t(n()));
        for (int i = 0; i < n(); ++i) {
            const double* row = kernel_row(i, nbr_codec[i].encode_global(s), a[i]);
            s_next[i] = rng.categorical(row, state_sizes[i]);
        }
    }

    // extension operator: known coordinates from (members, vals), defaults elsewhere
    std::vector<int> extend_state(const std::vector<int>& members, const std::vector<int>& vals) const {
        std::vector<int> out = default_state;
        for (std::size_t k = 0; k < members.size(); ++k) out[members[k]] = vals[k];
        return out;
    }

    std::vector<int> extend_action(const std::vector<int>& members, const std::vector<int>& vals) const {
        std::vector<int> out = default_action;
        for (std::size_t k = 0; k < members.size(); ++k) out[members[k]] = vals[k];
        return out;
    }

    void require_pairs_cap(std::int64_t cap, const char* who) const {
        if (n_pairs() > cap)
            throw CapError(std::string(who) + ": instance has " + std::to_string(n_pairs()) +
                           " state-action pairs, cap is " + std::to_string(cap));
    }

    // builds codecs, checks shapes, normalizes kernel rows.
    // rows off by more than 1e-9 are rejected; smaller drift is renormalized.
    void finalize() {
        int nn = graph.n;
        if (int(state_sizes.size()) != nn || int(action_sizes.size()) != nn)
            throw std::invalid_argument("mdp: sizes must cover every agent");
        for (int i = 0; i < nn; ++i)
            if (state_sizes[i] <= 0 || action_sizes[i] <= 0)
                throw std::invalid_argument("mdp: local spaces must be nonempty");
        if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("mdp: gamma must be in [0,1)");
        if (!(tau >= 0.0)) throw std::invalid_argument("mdp: tau must be >= 0");
        if (!(r_bar > 0.0)) throw std::invalid_argument("mdp: r_bar must be positive");

        std::vector<int> all(nn);
        for (int i = 0; i < nn; ++i) all[i] = i;
        state_codec = make_codec(all, state_sizes);
        action_codec = make_codec(all, action_sizes);

        nbr_codec.clear();
        for (int i = 0; i < nn; ++i)
            nbr_codec.push_back(make_codec(neighborhood(graph, i, 1), state_sizes));

        if (int(kernels.size()) != nn || int(rewards.size()) != nn)
            throw std::invalid_argument("mdp: kernel/reward table count mismatch");
        for (int i = 0; i < nn; ++i) {
            std::size_t want = std::size_t(nbr_codec[i].size) * action_sizes[i] * state_sizes[i];
            if (kernels[i].size() != want)
                throw std::invalid_argument("mdp: kernel table size mismatch for agent " +
                                            std::to_string(i));
            std::size_t rows = std::size_t(nbr_codec[i].size) * action_sizes[i];
            for (std::size_t r = 0; r < rows; ++r) {
                double* row = kernels[i].data() + r * state_sizes[i];
                double sum = 0.0;
                for (int k = 0; k < state_sizes[i]; ++k) {
                    if (row[k] < 0)
                        throw std::invalid_argument("mdp: negative kernel entry, agent " +
                                                    std::to_string(i));
                    sum += row[k];
                }
                if (std::abs(sum - 1.0) > 1e-9)
                    throw std::invalid_argument("mdp: kernel row " + std::to_string(r) +
                                                " of agent " + std::to_string(i) +
                                                " sums to " + std::to_string(sum));
                for (int k = 0; k < state_sizes[i]; ++k) row[k] /= sum;
            }
            if (rewards[i].size() != std::size_t(state_sizes[i]) * action_sizes[i])
                throw std::invalid_argument("mdp: reward table size mismatch for agent " +
                                            std::to_string(i));
            for (double r : rewards[i])
                if (r < 0.0 || r > r_bar + 1e-12)
                    throw std::invalid_argument("mdp: reward outside [0, r_bar] for agent " +
                                                std::to_string(i));
        }

        if (default_state.empty()) default_state.assign(nn, 0);
        if (default_action.empty()) default_action.assign(nn, 0);
        for (int i = 0; i < nn; ++i) {
            if (default_state[i] < 0 || default_state[i] >= state_sizes[i])
                throw std::invalid_argument("mdp: default state out of range");
            if (default_action[i] < 0 || default_action[i] >= action_sizes[i])
                throw std::invalid_argument("mdp: default action out of range");
        }

        if (rho.weights.empty()) rho = InitialDist::uniform(state_sizes);
        rho.validate(state_sizes);
    }
};

}  // namespace lpi
