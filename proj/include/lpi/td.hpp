#pragma once

// beta-hop temporal-difference policy evaluation. Each agent runs tabular
// TD(0) over its (beta-hop state, beta-hop action) cells on a shared
// trajectory, with the reward entropy-adjusted by the behavior policy:
//   radj_i(t) = r_i(t) + n tau H(zhat_i(.|kappa-state at t)).
// The transition (t-1, t) updates cell t-1 with step alpha_{t-1} toward
// radj_i(t-1) + gamma * Qhat(cell t); after the pass the per-state entropy
// bonus is subtracted from every cell, which makes the fixed point the exact
// local Q-function of the behavior policy.

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpi/mdp.hpp"
#include "lpi/policy.hpp"
#include "lpi/qtable.hpp"
#include "lpi/trajectory.hpp"

namespace lpi {

struct StepSchedule {
    enum class Kind { Constant, Polynomial };
    Kind kind = Kind::Constant;
    double alpha0 = 0.1;
    std::int64_t anneal_every = 0;  // 0 disables annealing
    double anneal_factor = 0.5;
    double H = 0.0, t0 = 0.0;

    double at(std::int64_t t) const {
        if (kind == Kind::Constant) {
            if (anneal_every <= 0) return alpha0;
            return alpha0 * std::pow(anneal_factor, double(t / anneal_every));
        }
        return H / (double(t) + t0);
    }
};

inline StepSchedule make_constant_schedule(double alpha0, std::int64_t anneal_every = 0,
                                           double anneal_factor = 0.5) {
    if (!(alpha0 > 0.0 && alpha0 <= 1.0))
        throw std::invalid_argument("step schedule: alpha0 must be in (0,1]");
    StepSchedule s;
    s.kind = StepSchedule::Kind::Constant;
    s.alpha0 = alpha0;
    s.anneal_every = anneal_every;
    s.anneal_factor = anneal_factor;
    return s;
}

// Polynomial schedule alpha_t = H/(t+t0) with H = 2/((1-gamma) xi) and
// t0 = max(4H, 2 K2 log T), where xi is the smallest beta-hop marginal mass
// of the behavior chain's stationary distribution.
inline StepSchedule make_polynomial_schedule(double gamma, double xi, std::int64_t T,
                                             double k2 = 1.0) {
    if (!(xi > 0.0))
        throw std::invalid_argument("step schedule: xi must be positive (chain must visit "
                                    "every beta-hop cell)");
    if (!(gamma >= 0.0 && gamma < 1.0))
        throw std::invalid_argument("step schedule: gamma must be in [0,1)");
    StepSchedule s;
    s.kind = StepSchedule::Kind::Polynomial;
    s.H = 2.0 / ((1.0 - gamma) * xi);
    s.t0 = std::max(4.0 * s.H, 2.0 * k2 * std::log(double(std::max<std::int64_t>(T, 2))));
    return s;
}

inline std::vector<TruncatedQ> localized_td0(const FactoredMdp& m, const JointPolicy& zhat,
                                             const Trajectory& traj, int beta,
                                             const StepSchedule& sched) {
    if (traj.n != m.n()) throw std::invalid_argument("td: trajectory/mdp agent count mismatch");
    std::vector<TruncatedQ> out;
    const double gamma = m.gamma, ntau = m.n() * m.tau;
    for (int i = 0; i < m.n(); ++i) {
        TruncatedQ q = make_truncated_q(m, i, beta);
        const KHopPolicy& pol = zhat[i];

        // entropy of the behavior row for every kappa-hop state
        std::vector<double> ent(std::size_t(pol.rows()), 0.0);
        for (std::int64_t r = 0; r < pol.rows(); ++r)
            ent[std::size_t(r)] = row_entropy(pol.row(r), pol.n_actions);

        std::int64_t prev_cell = -1;
        double prev_radj = 0.0;
        for (std::int64_t t = 0; t <= traj.T; ++t) {
            std::int64_t cell = q.s_codec.encode_global(traj.state(t)) * q.a_codec.size +
                                q.a_codec.encode_global(traj.action(t));
            double radj = traj.reward(t)[i] + ntau * ent[std::size_t(pol.row_index(traj.state(t)))];
            if (t > 0) {
                double alpha = sched.at(t - 1);
                double target = prev_radj + gamma * q.table[std::size_t(cell)];
                q.table[std::size_t(prev_cell)] =
                    (1.0 - alpha) * q.table[std::size_t(prev_cell)] + alpha * target;
            }
            prev_cell = cell;
            prev_radj = radj;
        }

        // remove the per-state entropy bonus from every cell; the kappa-hop
        // row of a cell is its own coordinates extended by the defaults
        auto cellmap = map_subset_index(q.s_codec, pol.codec, m.default_state);
        for (std::int64_t cs = 0; cs < q.s_codec.size; ++cs) {
            double corr = ntau * ent[std::size_t(cellmap[std::size_t(cs)])];
            for (std::int64_t ca = 0; ca < q.a_codec.size; ++ca) q.at(cs, ca) -= corr;
        }
        out.push_back(std::move(q));
    }
    return out;
}

}  // namespace lpi
