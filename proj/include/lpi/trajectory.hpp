#pragma once

// One on-policy rollout of the joint system, stored flat (step-major) so long
// trajectories do not fragment the heap. Entry t holds the state visited at
// step t, the action taken there, and the local rewards collected for it;
// there are T+1 entries, so the last state has an action and reward but no
// recorded successor.

#include <cstdint>
#include <vector>

#include "lpi/mdp.hpp"
#include "lpi/policy.hpp"

namespace lpi {

struct Trajectory {
    int n = 0;
    std::int64_t T = 0;            // number of transitions; T+1 recorded steps
    std::vector<int> states;       // (T+1) * n
    std::vector<int> actions;      // (T+1) * n
    std::vector<double> rewards;   // (T+1) * n, local rewards

    const int* state(std::int64_t t) const { return states.data() + std::size_t(t) * n; }
    const int* action(std::int64_t t) const { return actions.data() + std::size_t(t) * n; }
    const double* reward(std::int64_t t) const { return rewards.data() + std::size_t(t) * n; }
};

inline Trajectory collect_trajectory(const FactoredMdp& m, const JointPolicy& zeta, std::int64_t T,
                                     Rng& rng) {
    if (T < 0) throw std::invalid_argument("trajectory: negative length");
    Trajectory tr;
    tr.n = m.n();
    tr.T = T;
    tr.states.resize(std::size_t(T + 1) * m.n());
    tr.actions.resize(std::size_t(T + 1) * m.n());
    tr.rewards.resize(std::size_t(T + 1) * m.n());

    std::vector<int> s, a, s_next;
    m.rho.sample(rng, s);
    for (std::int64_t t = 0;; ++t) {
        sample_action(zeta, s, rng, a);
        for (int i = 0; i < m.n(); ++i) {
            tr.states[std::size_t(t) * m.n() + i] = s[i];
            tr.actions[std::size_t(t) * m.n() + i] = a[i];
            tr.rewards[std::size_t(t) * m.n() + i] = m.local_reward(i, s[i], a[i]);
        }
        if (t == T) break;
        m.sample_step(s, a, rng, s_next);
        s.swap(s_next);
    }
    return tr;
}

}  // namespace lpi
