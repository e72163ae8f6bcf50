#pragma once

// Instance builders. The spreading environment is a line of agents, each with
// a two-bit state (local digit s = s1 + 2*s2): bit 1 spreads to line
// neighbors by OR and then survives with probability 1-p1; bit 2 ignites
// only locally (with probability p_eff when the agent acts while s2 = 0,
// surely when s2 = 1) and survives with probability 1-p2. An agent earns 1
// unless its bits read (s1,s2) = (1,0), plus an action bonus 1 - cost * a.
//
// Random instances mix a fully neighbor-dependent random kernel A with a
// neighbor-blind one B, P = lambda A + (1-lambda) B, and bisect on lambda
// until the kernel sensitivity matrix C meets a row-sum budget.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpi/decay.hpp"
#include "lpi/graph.hpp"
#include "lpi/mdp.hpp"
#include "lpi/rng.hpp"

namespace lpi {

struct SpreadingParams {
    int n = 8;
    double p1 = 0.6;   // bit-1 recovery probability
    double p2 = 0.7;   // bit-2 recovery probability
    double cost = 0.3; // action cost
    double p_eff = 0.4;
    double gamma = 0.95;
    double tau = 0.05;
};

inline FactoredMdp spreading_env(const SpreadingParams& pr) {
    for (double p : {pr.p1, pr.p2, pr.p_eff})
        if (p < 0.0 || p > 1.0) throw std::invalid_argument("spreading env: probability out of range");
    FactoredMdp m;
    m.graph = make_line(pr.n);
    m.state_sizes.assign(std::size_t(pr.n), 4);
    m.action_sizes.assign(std::size_t(pr.n), 2);
    m.gamma = pr.gamma;
    m.tau = pr.tau;
    m.r_bar = 2.0;

    m.kernels.resize(std::size_t(pr.n));
    m.rewards.resize(std::size_t(pr.n));
    for (int i = 0; i < pr.n; ++i) {
        auto members = neighborhood(m.graph, i, 1);
        SubsetCodec nc = make_codec(members, m.state_sizes);
        int own = 0;
        while (members[own] != i) ++own;
        auto& ker = m.kernels[std::size_t(i)];
        ker.resize(std::size_t(nc.size) * 2 * 4);
        std::vector<int> vals;
        for (std::int64_t x = 0; x < nc.size; ++x) {
            nc.decode(x, vals);
            int bar1 = 0;
            for (int v : vals) bar1 |= v & 1;
            int s2 = (vals[own] >> 1) & 1;
            for (int a = 0; a < 2; ++a) {
                double q1 = bar1 ? 1.0 - pr.p1 : 0.0;
                double bar2 = s2 ? 1.0 : (a ? pr.p_eff : 0.0);
                double q2 = (1.0 - pr.p2) * bar2;
                double* row = ker.data() + std::size_t(x * 2 + a) * 4;
                for (int b1 = 0; b1 < 2; ++b1)
                    for (int b2 = 0; b2 < 2; ++b2)
                        row[b1 + 2 * b2] = (b1 ? q1 : 1.0 - q1) * (b2 ? q2 : 1.0 - q2);
            }
        }
        auto& rew = m.rewards[std::size_t(i)];
        rew.resize(4 * 2);
        for (int s = 0; s < 4; ++s)
            for (int a = 0; a < 2; ++a) {
                double state_part = (s == 1) ? 0.0 : 1.0;  // s = 1 encodes (s1,s2) = (1,0)
                rew[std::size_t(s * 2 + a)] = state_part + 1.0 - pr.cost * a;
            }
    }

    // start: one uniformly chosen seed agent has bit 1 set, bit 2 uniform everywhere
    InitialDist rho;
    for (int seed = 0; seed < pr.n; ++seed) {
        rho.weights.push_back(1.0 / pr.n);
        std::vector<std::vector<double>> comp;
        for (int i = 0; i < pr.n; ++i) {
            if (i == seed)
                comp.push_back({0.0, 0.5, 0.0, 0.5});
            else
                comp.push_back({0.5, 0.0, 0.5, 0.0});
        }
        rho.comps.push_back(std::move(comp));
    }
    m.rho = rho;
    m.finalize();
    return m;
}

struct RandomMdpParams {
    int n = 2;
    std::string graph = "line";  // line | cycle | star
    int state_size = 2;
    int action_size = 2;
    double gamma = 0.5;
    double tau = 1.0;
    double r_bar = 1.0;
    double eps_c = 0.4;     // row-sum budget for the kernel sensitivity matrix
    double min_prob = 0.05; // floor on kernel entries, keeps chains irreducible
    std::uint64_t seed = 1;
};

namespace detail {

inline void random_rows(std::vector<double>& table, std::size_t rows, int width, double min_prob,
                        Rng& rng) {
    table.resize(rows * std::size_t(width));
    for (std::size_t r = 0; r < rows; ++r) {
        double* row = table.data() + r * std::size_t(width);
        double sum = 0.0;
        for (int k = 0; k < width; ++k) {
            row[k] = min_prob - std::log(1.0 - rng.uniform());
            sum += row[k];
        }
        for (int k = 0; k < width; ++k) row[k] /= sum;
    }
}

}  // namespace detail

inline FactoredMdp random_factored_mdp(const RandomMdpParams& pr) {
    if (pr.eps_c < 0.0) throw std::invalid_argument("random mdp: negative sensitivity budget");
    FactoredMdp m;
    if (pr.graph == "line")
        m.graph = make_line(pr.n);
    else if (pr.graph == "cycle")
        m.graph = make_cycle(pr.n);
    else if (pr.graph == "star")
        m.graph = make_star(pr.n);
    else
        throw std::invalid_argument("random mdp: unknown graph kind " + pr.graph);
    m.state_sizes.assign(std::size_t(pr.n), pr.state_size);
    m.action_sizes.assign(std::size_t(pr.n), pr.action_size);
    m.gamma = pr.gamma;
    m.tau = pr.tau;
    m.r_bar = pr.r_bar;

    Rng rng(derive_seed(pr.seed, {0x3A0Du}));
    std::vector<std::vector<double>> ka, kb;
    ka.resize(std::size_t(pr.n));
    kb.resize(std::size_t(pr.n));
    m.rewards.resize(std::size_t(pr.n));
    std::vector<SubsetCodec> ncs;
    for (int i = 0; i < pr.n; ++i) {
        ncs.push_back(make_codec(neighborhood(m.graph, i, 1), m.state_sizes));
        std::size_t rows = std::size_t(ncs[std::size_t(i)].size) * pr.action_size;
        detail::random_rows(ka[std::size_t(i)], rows, pr.state_size, pr.min_prob, rng);
        // neighbor-blind component: one fixed row per agent
        detail::random_rows(kb[std::size_t(i)], 1, pr.state_size, pr.min_prob, rng);
        auto& rew = m.rewards[std::size_t(i)];
        rew.resize(std::size_t(pr.state_size) * pr.action_size);
        for (auto& r : rew) r = pr.r_bar * rng.uniform();
    }

    auto mix = [&](double lambda) {
        m.kernels.assign(std::size_t(pr.n), {});
        for (int i = 0; i < pr.n; ++i) {
            std::size_t rows = std::size_t(ncs[std::size_t(i)].size) * pr.action_size;
            auto& ker = m.kernels[std::size_t(i)];
            ker.resize(rows * std::size_t(pr.state_size));
            for (std::size_t r = 0; r < rows; ++r)
                for (int k = 0; k < pr.state_size; ++k)
                    ker[r * pr.state_size + k] =
                        lambda * ka[std::size_t(i)][r * pr.state_size + k] +
                        (1.0 - lambda) * kb[std::size_t(i)][std::size_t(k)];
        }
    };
    auto row_max = [&]() {
        Matrix C = c_matrix(m);
        double worst = 0.0;
        for (int i = 0; i < pr.n; ++i) {
            double s = 0.0;
            for (int j = 0; j < pr.n; ++j) s += C.at(i, j);
            worst = std::max(worst, s);
        }
        return worst;
    };

    // bisection on the mixing weight; C scales monotonically with lambda
    double lo = 0.0, hi = 1.0;
    mix(1.0);
    m.finalize();
    if (row_max() > pr.eps_c) {
        for (int it = 0; it < 64 && hi - lo > 1e-12; ++it) {
            double mid = 0.5 * (lo + hi);
            mix(mid);
            m.finalize();
            if (row_max() <= pr.eps_c)
                lo = mid;
            else
                hi = mid;
        }
        mix(lo);
        m.finalize();
        if (row_max() > pr.eps_c + 1e-9)
            throw NumericalError("random mdp: bisection failed to meet the sensitivity budget");
    }
    return m;
}

}  // namespace lpi
