#pragma once

// Interaction matrices and distance-decay certificates. These quantify how
// strongly one agent's kernel, policy, or Q-function reacts to another
// agent's coordinates; the decay certificate bounds weighted row/column sums
// with weight (dist+1)^mu. All sups are exhaustive enumerations guarded by a
// per-entry work cap.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "lpi/exact.hpp"
#include "lpi/mdp.hpp"
#include "lpi/policy.hpp"
#include "lpi/qtable.hpp"

namespace lpi {

struct Matrix {
    int n = 0;
    std::vector<double> v;

    Matrix() = default;
    explicit Matrix(int n_) : n(n_), v(std::size_t(n_) * n_, 0.0) {}
    double& at(int i, int j) { return v[std::size_t(i) * n + j]; }
    double at(int i, int j) const { return v[std::size_t(i) * n + j]; }
};

struct DecayOptions {
    std::int64_t entry_cap = std::int64_t(1) << 16;  // enumeration work per matrix entry
    std::int64_t pairs_cap = std::int64_t(1) << 20;
    double tol = 1e-9;
};

namespace detail {

inline void check_entry_cap(std::int64_t work, std::int64_t cap, const char* what, int i, int j) {
    if (work > cap)
        throw CapError(std::string("decay diagnostics: ") + what + " entry (" + std::to_string(i) +
                       "," + std::to_string(j) + ") needs " + std::to_string(work) +
                       " evaluations, cap is " + std::to_string(cap));
}

}  // namespace detail

// Kernel sensitivity matrix. C[i][j] is zero unless j is in the closed 1-hop
// neighborhood of i; for a neighbor it is the worst-case TV shift of agent
// i's kernel row when only agent j's state changes, and on the diagonal the
// own (state, action) pair is perturbed instead.
inline Matrix c_matrix(const FactoredMdp& m, const DecayOptions& opts = {}) {
    Matrix C(m.n());
    for (int i = 0; i < m.n(); ++i) {
        const SubsetCodec& nc = m.nbr_codec[i];
        const int Si = m.state_sizes[i], Ai = m.action_sizes[i];
        for (std::size_t pj = 0; pj < nc.members.size(); ++pj) {
            int j = nc.members[pj];
            const int Sj = nc.sizes[pj];
            // enumerate the other neighborhood coordinates
            std::int64_t rest = nc.size / Sj;
            double sup = 0.0;
            if (j != i) {
                detail::check_entry_cap(rest * Ai * Sj * Sj * Si, opts.entry_cap, "C matrix", i, j);
                std::vector<int> digits(nc.members.size(), 0);
                for (std::int64_t r = 0; r < rest; ++r) {
                    // digits hold the rest coordinates; slot pj stays free
                    std::int64_t base = 0;
                    for (std::size_t k = 0; k < nc.members.size(); ++k)
                        if (k != pj) base += nc.strides[k] * digits[k];
                    for (int ai = 0; ai < Ai; ++ai)
                        for (int sj = 0; sj < Sj; ++sj)
                            for (int sj2 = sj + 1; sj2 < Sj; ++sj2)
                                sup = std::max(sup, total_variation(
                                    m.kernel_row(i, base + nc.strides[pj] * sj, ai),
                                    m.kernel_row(i, base + nc.strides[pj] * sj2, ai), Si));
                    // odometer over the rest slots
                    for (std::size_t k = 0; k < nc.members.size(); ++k) {
                        if (k == pj) continue;
                        if (++digits[k] < nc.sizes[k]) break;
                        digits[k] = 0;
                    }
                }
            } else {
                std::int64_t own = std::int64_t(Si) * Ai;
                detail::check_entry_cap(rest * own * own * Si, opts.entry_cap, "C matrix", i, j);
                std::vector<int> digits(nc.members.size(), 0);
                for (std::int64_t r = 0; r < rest; ++r) {
                    std::int64_t base = 0;
                    for (std::size_t k = 0; k < nc.members.size(); ++k)
                        if (k != pj) base += nc.strides[k] * digits[k];
                    for (std::int64_t z = 0; z < own; ++z)
                        for (std::int64_t z2 = z + 1; z2 < own; ++z2) {
                            int s1 = int(z % Si), a1 = int(z / Si);
                            int s2 = int(z2 % Si), a2 = int(z2 / Si);
                            sup = std::max(sup, total_variation(
                                m.kernel_row(i, base + nc.strides[pj] * s1, a1),
                                m.kernel_row(i, base + nc.strides[pj] * s2, a2), Si));
                        }
                    for (std::size_t k = 0; k < nc.members.size(); ++k) {
                        if (k == pj) continue;
                        if (++digits[k] < nc.sizes[k]) break;
                        digits[k] = 0;
                    }
                }
            }
            C.at(i, j) = sup;
        }
    }
    return C;
}

// Policy sensitivity: worst-case TV shift of agent i's action distribution
// when only agent j's state changes. Zero whenever j is outside the policy's
// neighborhood.
inline Matrix policy_interaction(const FactoredMdp& m, const JointPolicy& zeta,
                                 const DecayOptions& opts = {}) {
    Matrix Z(m.n());
    for (int i = 0; i < m.n(); ++i) {
        const KHopPolicy& p = zeta[i];
        for (std::size_t pj = 0; pj < p.members.size(); ++pj) {
            int j = p.members[pj];
            const int Sj = p.codec.sizes[pj];
            std::int64_t rest = p.codec.size / Sj;
            detail::check_entry_cap(rest * Sj * Sj * p.n_actions, opts.entry_cap,
                                    "policy interaction", i, j);
            double sup = 0.0;
            std::vector<int> digits(p.members.size(), 0);
            for (std::int64_t r = 0; r < rest; ++r) {
                std::int64_t base = 0;
                for (std::size_t k = 0; k < p.members.size(); ++k)
                    if (k != pj) base += p.codec.strides[k] * digits[k];
                for (int sj = 0; sj < Sj; ++sj)
                    for (int sj2 = sj + 1; sj2 < Sj; ++sj2)
                        sup = std::max(sup, total_variation(
                            p.row(base + p.codec.strides[pj] * sj),
                            p.row(base + p.codec.strides[pj] * sj2), p.n_actions));
                for (std::size_t k = 0; k < p.members.size(); ++k) {
                    if (k == pj) continue;
                    if (++digits[k] < p.codec.sizes[k]) break;
                    digits[k] = 0;
                }
            }
            Z.at(i, j) = sup;
        }
    }
    return Z;
}

// Q sensitivity: worst-case change of Q_i when only agent j's state-action
// coordinates move. Computed as max bucket range after stripping agent j's
// digits, which is exact and linear in the table size.
inline Matrix q_interaction(const FactoredMdp& m, const std::vector<LocalQTable>& qs,
                            const DecayOptions& opts = {}) {
    m.require_pairs_cap(opts.pairs_cap, "q interaction");
    if (int(qs.size()) != m.n())
        throw std::invalid_argument("q interaction: need one local Q per agent");
    const std::int64_t S = m.n_states(), A = m.n_actions();
    Matrix Z(m.n());
    for (int j = 0; j < m.n(); ++j) {
        std::vector<int> others;
        for (int k = 0; k < m.n(); ++k)
            if (k != j) others.push_back(k);
        SubsetCodec sc = make_codec(others, m.state_sizes);
        SubsetCodec ac = make_codec(others, m.action_sizes);
        auto smap = map_subset_index(m.state_codec, sc, std::vector<int>(m.n(), 0));
        auto amap = map_subset_index(m.action_codec, ac, std::vector<int>(m.n(), 0));
        std::vector<double> lo(std::size_t(sc.size * ac.size), 0.0);
        std::vector<double> hi(std::size_t(sc.size * ac.size), 0.0);
        for (int i = 0; i < m.n(); ++i) {
            std::fill(lo.begin(), lo.end(), std::numeric_limits<double>::infinity());
            std::fill(hi.begin(), hi.end(), -std::numeric_limits<double>::infinity());
            const auto& q = qs[i].table;
            for (std::int64_t s = 0; s < S; ++s) {
                std::int64_t sb = smap[std::size_t(s)];
                for (std::int64_t a = 0; a < A; ++a) {
                    std::size_t b = std::size_t(sb + sc.size * amap[std::size_t(a)]);
                    double x = q[std::size_t(s * A + a)];
                    lo[b] = std::min(lo[b], x);
                    hi[b] = std::max(hi[b], x);
                }
            }
            double sup = 0.0;
            for (std::size_t b = 0; b < lo.size(); ++b) sup = std::max(sup, hi[b] - lo[b]);
            Z.at(i, j) = sup;
        }
    }
    return Z;
}

// Second-order sensitivity of a global Q table: the worst mixed difference in
// agent i's and agent j's coordinates with everything else held fixed.
// Diagonal is zero by convention.
inline Matrix second_order_interaction(const FactoredMdp& m, const std::vector<double>& q_global,
                                       const DecayOptions& opts = {}) {
    m.require_pairs_cap(opts.pairs_cap, "second-order interaction");
    const std::int64_t S = m.n_states(), A = m.n_actions();
    if (std::int64_t(q_global.size()) != S * A)
        throw std::invalid_argument("second-order interaction: table size mismatch");
    Matrix H(m.n());
    for (int i = 0; i < m.n(); ++i)
        for (int j = i + 1; j < m.n(); ++j) {
            std::vector<int> others;
            for (int k = 0; k < m.n(); ++k)
                if (k != i && k != j) others.push_back(k);
            SubsetCodec sc = make_codec(others, m.state_sizes);
            SubsetCodec ac = make_codec(others, m.action_sizes);
            auto smap = map_subset_index(m.state_codec, sc, std::vector<int>(m.n(), 0));
            auto amap = map_subset_index(m.action_codec, ac, std::vector<int>(m.n(), 0));
            const std::int64_t Zi = std::int64_t(m.state_sizes[i]) * m.action_sizes[i];
            const std::int64_t Zj = std::int64_t(m.state_sizes[j]) * m.action_sizes[j];
            const std::int64_t buckets = sc.size * ac.size;
            detail::check_entry_cap(buckets * Zi * Zi * Zj * Zj, opts.entry_cap,
                                    "second-order interaction", i, j);
            std::vector<double> block(std::size_t(buckets * Zi * Zj), 0.0);
            std::vector<int> s_tuple, a_tuple;
            for (std::int64_t s = 0; s < S; ++s) {
                m.state_codec.decode(s, s_tuple);
                for (std::int64_t a = 0; a < A; ++a) {
                    m.action_codec.decode(a, a_tuple);
                    std::int64_t zi = s_tuple[i] + std::int64_t(m.state_sizes[i]) * a_tuple[i];
                    std::int64_t zj = s_tuple[j] + std::int64_t(m.state_sizes[j]) * a_tuple[j];
                    std::int64_t b = smap[std::size_t(s)] + sc.size * amap[std::size_t(a)];
                    block[std::size_t((b * Zi + zi) * Zj + zj)] = q_global[std::size_t(s * A + a)];
                }
            }
            double sup = 0.0;
            for (std::int64_t b = 0; b < buckets; ++b) {
                const double* blk = block.data() + std::size_t(b * Zi * Zj);
                for (std::int64_t zi = 0; zi < Zi; ++zi)
                    for (std::int64_t zi2 = zi + 1; zi2 < Zi; ++zi2)
                        for (std::int64_t zj = 0; zj < Zj; ++zj)
                            for (std::int64_t zj2 = zj + 1; zj2 < Zj; ++zj2)
                                sup = std::max(sup, std::abs(blk[zi * Zj + zj] - blk[zi2 * Zj + zj] -
                                                             blk[zi * Zj + zj2] + blk[zi2 * Zj + zj2]));
            }
            H.at(i, j) = H.at(j, i) = sup;
        }
    return H;
}

struct DecayCertificate {
    double nu = 0.0;     // max weighted row/column sum
    double mu = 0.0;     // caller-supplied decay exponent
    bool from_row = true;
    int index = 0;       // witness row or column
    std::vector<double> row_sums, col_sums;
};

// nu = max over rows and columns of sum_j A[i][j] (dist(i,j)+1)^mu.
inline DecayCertificate decay_check(const Matrix& A, const NetworkGraph& g, double mu) {
    if (A.n != g.n) throw std::invalid_argument("decay check: matrix/graph size mismatch");
    DecayCertificate c;
    c.mu = mu;
    c.row_sums.assign(std::size_t(A.n), 0.0);
    c.col_sums.assign(std::size_t(A.n), 0.0);
    for (int i = 0; i < A.n; ++i)
        for (int j = 0; j < A.n; ++j) {
            if (A.at(i, j) < 0.0)
                throw std::invalid_argument("decay check: negative matrix entry");
            double w = A.at(i, j) * std::pow(double(g.dist[i][j] + 1), mu);
            c.row_sums[std::size_t(i)] += w;
            c.col_sums[std::size_t(j)] += w;
        }
    for (int i = 0; i < A.n; ++i) {
        if (c.row_sums[std::size_t(i)] > c.nu) {
            c.nu = c.row_sums[std::size_t(i)];
            c.from_row = true;
            c.index = i;
        }
        if (c.col_sums[std::size_t(i)] > c.nu) {
            c.nu = c.col_sums[std::size_t(i)];
            c.from_row = false;
            c.index = i;
        }
    }
    return c;
}

// sum of A[i][j] over agents j strictly beyond kappa hops from i;
// a (nu, mu)-decay certificate bounds this by nu / (kappa+1)^mu.
inline double tail_sum(const Matrix& A, const NetworkGraph& g, int i, int kappa) {
    double s = 0.0;
    for (int j = 0; j < A.n; ++j)
        if (g.dist[i][j] > kappa) s += A.at(i, j);
    return s;
}

struct DecayAlgebraReport {
    double sum_lhs = 0.0, sum_rhs = 0.0;    // cert(cA + c'A') vs c nu + c' nu'
    double prod_lhs = 0.0, prod_rhs = 0.0;  // cert(A A') vs nu nu'
    bool ok(double eps = 1e-9) const {
        return sum_lhs <= sum_rhs + eps && prod_lhs <= prod_rhs + eps;
    }
};

inline DecayAlgebraReport decay_algebra_check(const Matrix& A, const Matrix& B, double c_a,
                                              double c_b, const NetworkGraph& g, double mu) {
    if (A.n != B.n) throw std::invalid_argument("decay algebra: size mismatch");
    DecayCertificate ca = decay_check(A, g, mu), cb = decay_check(B, g, mu);
    Matrix sum(A.n), prod(A.n);
    for (int i = 0; i < A.n; ++i)
        for (int j = 0; j < A.n; ++j) {
            sum.at(i, j) = c_a * A.at(i, j) + c_b * B.at(i, j);
            double acc = 0.0;
            for (int k = 0; k < A.n; ++k) acc += A.at(i, k) * B.at(k, j);
            prod.at(i, j) = acc;
        }
    DecayAlgebraReport rep;
    rep.sum_lhs = decay_check(sum, g, mu).nu;
    rep.sum_rhs = c_a * ca.nu + c_b * cb.nu;
    rep.prod_lhs = decay_check(prod, g, mu).nu;
    rep.prod_rhs = ca.nu * cb.nu;
    return rep;
}

struct TruncationReport {
    double empirical = 0.0;  // sup_i sup_{s,a} |Q_i(s,a) - Qhat_i(restriction)|
    double bound = 0.0;      // nu / (beta+1)^mu
    double nu = 0.0;
    double mu = 0.0;
    int beta = 0;
    std::vector<double> per_agent;
};

inline TruncationReport truncation_error(const FactoredMdp& m, const std::vector<LocalQTable>& full,
                                         const std::vector<TruncatedQ>& trunc, double mu,
                                         const DecayOptions& opts = {}) {
    if (full.size() != trunc.size() || int(full.size()) != m.n())
        throw std::invalid_argument("truncation error: need one table pair per agent");
    TruncationReport rep;
    rep.mu = mu;
    rep.beta = trunc.empty() ? 0 : trunc[0].beta;
    const std::int64_t S = m.n_states(), A = m.n_actions();
    std::vector<int> s_tuple, a_tuple;
    for (int i = 0; i < m.n(); ++i) {
        if (trunc[i].beta != rep.beta)
            throw std::invalid_argument("truncation error: mixed beta across agents");
        double sup = 0.0;
        for (std::int64_t s = 0; s < S; ++s) {
            m.state_codec.decode(s, s_tuple);
            std::int64_t cs = trunc[i].s_codec.encode_global(s_tuple);
            for (std::int64_t a = 0; a < A; ++a) {
                m.action_codec.decode(a, a_tuple);
                std::int64_t ca = trunc[i].a_codec.encode_global(a_tuple);
                sup = std::max(sup, std::abs(full[i].table[std::size_t(s * A + a)] -
                                             trunc[i].at(cs, ca)));
            }
        }
        rep.per_agent.push_back(sup);
        rep.empirical = std::max(rep.empirical, sup);
    }
    DecayCertificate cert = decay_check(q_interaction(m, full, opts), m.graph, mu);
    rep.nu = cert.nu;
    rep.bound = cert.nu / std::pow(double(rep.beta + 1), mu);
    return rep;
}

struct PerformanceDifferenceReport {
    double lhs = 0.0;    // ||V^zeta - V^zeta_tilde||_inf
    double rhs = 0.0;    // (tau sigma + nu'/n) / (1-gamma) * sum_i sup_s TV + 4 tol
    double tv_sum = 0.0;
    bool pass = false;
};

inline PerformanceDifferenceReport performance_difference(const FactoredMdp& m,
                                                          const JointPolicy& zeta,
                                                          const JointPolicy& zeta_tilde,
                                                          double sigma, double nu_prime,
                                                          const ExactOptions& opts = {}) {
    PerformanceDifferenceReport rep;
    ValueTable v1 = policy_value(m, zeta, opts);
    ValueTable v2 = policy_value(m, zeta_tilde, opts);
    rep.lhs = sup_diff(v1, v2);
    std::vector<int> tuple;
    for (int i = 0; i < m.n(); ++i) {
        double sup = 0.0;
        for (std::int64_t s = 0; s < m.n_states(); ++s) {
            m.state_codec.decode(s, tuple);
            sup = std::max(sup, total_variation(zeta[i].row(zeta[i].codec.encode_global(tuple)),
                                                zeta_tilde[i].row(zeta_tilde[i].codec.encode_global(tuple)),
                                                m.action_sizes[i]));
        }
        rep.tv_sum += sup;
    }
    rep.rhs = (m.tau * sigma + nu_prime / m.n()) * rep.tv_sum / (1.0 - m.gamma) + 4.0 * opts.tol;
    rep.pass = rep.lhs <= rep.rhs;
    return rep;
}

inline void write_matrix_csv(const Matrix& A, const std::string& name, const std::string& path) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "# lpi.matrix.v1 " << name << "\n";
    char buf[64];
    for (int i = 0; i < A.n; ++i) {
        for (int j = 0; j < A.n; ++j) {
            std::snprintf(buf, sizeof buf, "%.17g", A.at(i, j));
            f << (j ? "," : "") << buf;
        }
        f << "\n";
    }
}

}  // namespace lpi
