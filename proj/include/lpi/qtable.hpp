#pragma once

// Q-function containers. LocalQTable is agent i's Q over the full joint
// space (only feasible on small instances); TruncatedQ is the beta-hop
// object the distributed algorithm actually learns: a table over agent i's
// beta-hop neighborhood states and actions.

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "lpi/mdp.hpp"

namespace lpi {

struct LocalQTable {
    int agent = 0;
    std::vector<double> table;  // [s_idx * |A| + a_idx] over global joint spaces
};

struct TruncatedQ {
    int agent = 0;
    int beta = 0;
    std::vector<int> members;  // beta-hop neighborhood, sorted
    SubsetCodec s_codec;       // member state digits
    SubsetCodec a_codec;       // member action digits
    std::vector<double> table; // [s_idx * a_codec.size + a_idx]

    double& at(std::int64_t s_idx, std::int64_t a_idx) {
        return table[std::size_t(s_idx * a_codec.size + a_idx)];
    }
    double at(std::int64_t s_idx, std::int64_t a_idx) const {
        return table[std::size_t(s_idx * a_codec.size + a_idx)];
    }
};

inline TruncatedQ make_truncated_q(const FactoredMdp& m, int agent, int beta) {
    TruncatedQ q;
    q.agent = agent;
    q.beta = beta;
    q.members = neighborhood(m.graph, agent, beta);
    q.s_codec = make_codec(q.members, m.state_sizes);
    q.a_codec = make_codec(q.members, m.action_sizes);
    q.table.assign(std::size_t(q.s_codec.size * q.a_codec.size), 0.0);
    return q;
}

// Point-mass truncation: the beta-hop cell takes the full Q evaluated at the
// cell's coordinates extended by the default state/action. Exact whenever
// beta reaches the diameter.
inline TruncatedQ truncate_local_q(const FactoredMdp& m, const LocalQTable& full, int beta) {
    TruncatedQ q = make_truncated_q(m, full.agent, beta);
    const std::int64_t A = m.n_actions();
    std::vector<int> s_tuple, a_tuple;
    for (std::int64_t cs = 0; cs < q.s_codec.size; ++cs) {
        s_tuple = m.default_state;
        scatter(q.s_codec, cs, s_tuple);
        std::int64_t s = m.state_codec.encode_global(s_tuple);
        for (std::int64_t ca = 0; ca < q.a_codec.size; ++ca) {
            a_tuple = m.default_action;
            scatter(q.a_codec, ca, a_tuple);
            q.at(cs, ca) = full.table[std::size_t(s * A + m.action_codec.encode_global(a_tuple))];
        }
    }
    return q;
}

}  // namespace lpi
