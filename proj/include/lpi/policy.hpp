#pragma once

// kappa-hop policies: agent i's action distribution reads only the states of
// agents within kappa hops. A joint policy is one table per agent; the joint
// action factorizes as the product of the local rows.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpi/mdp.hpp"

namespace lpi {

struct KHopPolicy {
    int agent = 0;
    int radius = 0;
    std::vector<int> members;  // kappa-hop neighborhood, sorted
    SubsetCodec codec;         // state digits of the members
    int n_actions = 0;
    std::vector<double> table;  // [row * n_actions + a], rows indexed by codec

    double* row(std::int64_t r) { return table.data() + std::size_t(r) * n_actions; }
    const double* row(std::int64_t r) const { return table.data() + std::size_t(r) * n_actions; }
    std::int64_t rows() const { return codec.size; }

    std::int64_t row_index(const std::vector<int>& global_state) const {
        return codec.encode_global(global_state);
    }

    std::int64_t row_index(const int* global_state) const { return codec.encode_global(global_state); }
};

using JointPolicy = std::vector<KHopPolicy>;

inline KHopPolicy uniform_local_policy(const FactoredMdp& m, int agent, int kappa) {
    KHopPolicy p;
    p.agent = agent;
    p.radius = kappa;
    p.members = neighborhood(m.graph, agent, kappa);
    p.codec = make_codec(p.members, m.state_sizes);
    p.n_actions = m.action_sizes[agent];
    p.table.assign(std::size_t(p.codec.size) * p.n_actions, 1.0 / p.n_actions);
    return p;
}

inline JointPolicy uniform_policy(const FactoredMdp& m, int kappa) {
    JointPolicy zeta;
    for (int i = 0; i < m.n(); ++i) zeta.push_back(uniform_local_policy(m, i, kappa));
    return zeta;
}

inline void sample_action(const JointPolicy& zeta, const std::vector<int>& s, Rng& rng,
                          std::vector<int>& a) {
    a.resize(zeta.size());
    for (std::size_t i = 0; i < zeta.size(); ++i) {
        const KHopPolicy& p = zeta[i];
        a[i] = rng.categorical(p.row(p.row_index(s)), p.n_actions);
    }
}

// log of the joint probability; -inf if any factor is zero
inline double log_prob(const JointPolicy& zeta, const std::vector<int>& s,
                       const std::vector<int>& a) {
    double lp = 0.0;
    for (std::size_t i = 0; i < zeta.size(); ++i) {
        double p = zeta[i].row(zeta[i].row_index(s))[a[i]];
        if (p <= 0.0) return -std::numeric_limits<double>::infinity();
        lp += std::log(p);
    }
    return lp;
}

inline double total_variation(const double* p, const double* q, int k) {
    double s = 0.0;
    for (int x = 0; x < k; ++x) s += std::abs(p[x] - q[x]);
    return 0.5 * s;
}

// entropy of one probability row, with 0 log 0 = 0
inline double row_entropy(const double* p, int k) {
    double h = 0.0;
    for (int x = 0; x < k; ++x)
        if (p[x] > 0.0) h -= p[x] * std::log(p[x]);
    return h;
}

// max over agents, rows, action pairs of log(p(a)/p(a')). Any zero entry makes
// the policy sigma-regular for no finite sigma; that is signalled as +inf.
inline double sigma_regularity(const JointPolicy& zeta) {
    double sigma = 0.0;
    for (const KHopPolicy& p : zeta) {
        for (std::int64_t r = 0; r < p.rows(); ++r) {
            const double* row = p.row(r);
            double lo = row[0], hi = row[0];
            for (int a = 1; a < p.n_actions; ++a) {
                lo = std::min(lo, row[a]);
                hi = std::max(hi, row[a]);
            }
            if (lo <= 0.0) return std::numeric_limits<double>::infinity();
            sigma = std::max(sigma, std::log(hi / lo));
        }
    }
    return sigma;
}

// Builds the kappa-hop restriction of a wider policy: each row is the source
// policy evaluated at the row's states extended by the default state.
inline JointPolicy truncate_policy(const FactoredMdp& m, const JointPolicy& zeta, int kappa) {
    JointPolicy out;
    for (int i = 0; i < m.n(); ++i) {
        const KHopPolicy& src = zeta[i];
        KHopPolicy p = uniform_local_policy(m, i, kappa);
        std::vector<int> tuple;
        for (std::int64_t r = 0; r < p.rows(); ++r) {
            std::vector<int> global = m.default_state;
            scatter(p.codec, r, global);
            const double* srow = src.row(src.row_index(global));
            for (int a = 0; a < p.n_actions; ++a) p.row(r)[a] = srow[a];
        }
        out.push_back(std::move(p));
    }
    return out;
}

inline void renormalize_row(double* p, int k) {
    double s = 0.0;
    for (int x = 0; x < k; ++x) s += p[x];
    if (!(s > 0.0)) throw std::runtime_error("policy row degenerated to zero mass");
    for (int x = 0; x < k; ++x) p[x] /= s;
}

// flat text format: header then one line per row,
//   "agent <i> radius <k> rows <R> actions <A> members <m0> <m1> ..."
//   "<agent> <row> <p0> <p1> ..."
inline void save_policy(const JointPolicy& zeta, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "# lpi.policy.v1\n";
    char buf[64];
    for (const KHopPolicy& p : zeta) {
        f << "agent " << p.agent << " radius " << p.radius << " rows " << p.rows()
          << " actions " << p.n_actions << " members";
        for (int mbr : p.members) f << ' ' << mbr;
        f << '\n';
        for (std::int64_t r = 0; r < p.rows(); ++r) {
            f << p.agent << ' ' << r;
            for (int a = 0; a < p.n_actions; ++a) {
                std::snprintf(buf, sizeof buf, "%.17g", p.row(r)[a]);
                f << ' ' << buf;
            }
            f << '\n';
        }
    }
}

inline JointPolicy load_policy(const FactoredMdp& m, const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    std::string line;
    if (!std::getline(f, line) || line != "# lpi.policy.v1")
        throw std::runtime_error(path + ": not a policy file (bad header)");
    JointPolicy zeta;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::istringstream hdr(line);
        std::string kw;
        hdr >> kw;
        if (kw != "agent") throw std::runtime_error(path + ": expected agent header, got: " + line);
        int agent, radius;
        std::int64_t rows;
        int actions;
        std::string w;
        hdr >> agent >> w >> radius >> w >> rows >> w >> actions >> w;
        KHopPolicy p = uniform_local_policy(m, agent, radius);
        if (p.rows() != rows || p.n_actions != actions)
            throw std::runtime_error(path + ": table shape does not match the MDP");
        for (std::int64_t r = 0; r < rows; ++r) {
            if (!std::getline(f, line)) throw std::runtime_error(path + ": truncated table");
            std::istringstream row(line);
            int a_id;
            std::int64_t ridx;
            row >> a_id >> ridx;
            if (a_id != agent || ridx != r) throw std::runtime_error(path + ": row out of order");
            for (int a = 0; a < actions; ++a) row >> p.row(r)[a];
            renormalize_row(p.row(r), actions);
        }
        zeta.push_back(std::move(p));
    }
    if (int(zeta.size()) != m.n()) throw std::runtime_error(path + ": wrong agent count");
    return zeta;
}

}  // namespace lpi
