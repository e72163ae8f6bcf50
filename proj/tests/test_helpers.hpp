#pragma once

// Small hand-built instances shared across test files.

#include "lpi/mdp.hpp"

namespace testenv {

// One agent, one state, two actions, r = [1, 0], gamma = 0.5, tau = 1.
// Soft-optimal value solves V = 0.5 V + log(1 + e), so V* = 2 log(1 + e)
// and the optimal policy picks action 0 with probability e / (1 + e).
// Under the uniform policy V = 1 + 2 log 2.
inline lpi::FactoredMdp bandit_env() {
    lpi::FactoredMdp m;
    m.graph = lpi::make_graph(1, {});
    m.state_sizes = {1};
    m.action_sizes = {2};
    m.gamma = 0.5;
    m.tau = 1.0;
    m.r_bar = 1.0;
    m.kernels = {{1.0, 1.0}};  // both actions keep the single state
    m.rewards = {{1.0, 0.0}};
    m.finalize();
    return m;
}

// Two agents on an edge with hand-picked sensitivities. Agent 0's kernel
// reacts only to agent 1's state (TV 0.4 between the two rows); agent 1's
// kernel reacts only to its own action (TV 0.2). So the kernel interaction
// matrix is exactly [[0, 0.4], [0, 0.2]].
inline lpi::FactoredMdp chain2_env() {
    lpi::FactoredMdp m;
    m.graph = lpi::make_graph(2, {{0, 1}});
    m.state_sizes = {2, 2};
    m.action_sizes = {2, 2};
    m.gamma = 0.5;
    m.tau = 1.0;
    m.r_bar = 1.0;
    m.kernels.assign(2, std::vector<double>(16, 0.0));
    // neighborhood tuple index: s_own + 2 * s_other is NOT the layout; the
    // codec orders members sorted, first fastest, so nbr_idx = s_0 + 2 * s_1
    // for both agents.
    for (int s0 = 0; s0 < 2; ++s0)
        for (int s1 = 0; s1 < 2; ++s1)
            for (int a = 0; a < 2; ++a) {
                std::int64_t nbr = s0 + 2 * s1;
                double p0 = s1 == 0 ? 0.5 : 0.9;  // agent 0: P(next = 0)
                m.kernels[0][std::size_t((nbr * 2 + a) * 2 + 0)] = p0;
                m.kernels[0][std::size_t((nbr * 2 + a) * 2 + 1)] = 1.0 - p0;
                double p1 = a == 0 ? 0.5 : 0.7;  // agent 1: P(next = 0)
                m.kernels[1][std::size_t((nbr * 2 + a) * 2 + 0)] = p1;
                m.kernels[1][std::size_t((nbr * 2 + a) * 2 + 1)] = 1.0 - p1;
            }
    m.rewards = {{0.0, 0.0, 1.0, 1.0},      // r_0(s, a) = s
                 {0.0, 0.4, 0.3, 0.7}};     // r_1(s, a) = 0.3 s + 0.4 a
    m.finalize();
    return m;
}

// One agent, two states, one action, P(0 -> 1) = p01, P(1 -> 0) = p10.
inline lpi::FactoredMdp two_state_chain(double p01, double p10) {
    lpi::FactoredMdp m;
    m.graph = lpi::make_graph(1, {});
    m.state_sizes = {2};
    m.action_sizes = {1};
    m.gamma = 0.5;
    m.tau = 1.0;
    m.r_bar = 1.0;
    m.kernels = {{1.0 - p01, p01, p10, 1.0 - p10}};
    m.rewards = {{1.0, 0.0}};
    m.finalize();
    return m;
}

}  // namespace testenv
