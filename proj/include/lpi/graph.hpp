#pragma once

// Agent interaction graph: undirected, connected, dense ids 0..n-1.
// Distances are all-pairs BFS hop counts; kappa-hop neighborhoods are the
// basic locality primitive everything else builds on.

#include <algorithm>
#include <cstdint>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace lpi {

struct NetworkGraph {
    int n = 0;
    std::vector<std::vector<int>> adj;   // sorted neighbor lists, no self entries
    std::vector<std::vector<int>> dist;  // all-pairs hop distances
    int diameter = 0;
};

inline NetworkGraph make_graph(int n, const std::vector<std::pair<int, int>>& edges) {
    if (n <= 0) throw std::invalid_argument("graph: need at least one agent");
    NetworkGraph g;
    g.n = n;
    std::vector<std::set<int>> nbrs(n);
    for (auto [a, b] : edges) {
        if (a < 0 || a >= n || b < 0 || b >= n)
            throw std::invalid_argument("graph: edge endpoint out of range");
        if (a == b) continue;  // self loops are implicit everywhere, drop them
        nbrs[a].insert(b);
        nbrs[b].insert(a);
    }
    g.adj.resize(n);
    for (int i = 0; i < n; ++i) g.adj[i].assign(nbrs[i].begin(), nbrs[i].end());

    g.dist.assign(n, std::vector<int>(n, -1));
    for (int s = 0; s < n; ++s) {
        auto& d = g.dist[s];
        d[s] = 0;
        std::queue<int> q;
        q.push(s);
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            for (int v : g.adj[u])
                if (d[v] < 0) {
                    d[v] = d[u] + 1;
                    q.push(v);
                }
        }
        for (int t = 0; t < n; ++t) {
            if (d[t] < 0)
                throw std::invalid_argument("graph: disconnected (agent " + std::to_string(t) +
                                            " unreachable from agent " + std::to_string(s) + ")");
            g.diameter = std::max(g.diameter, d[t]);
        }
    }
    return g;
}

inline NetworkGraph make_line(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
    return make_graph(n, e);
}

inline NetworkGraph make_cycle(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 0; i + 1 < n; ++i) e.push_back({i, i + 1});
    if (n > 2) e.push_back({n - 1, 0});
    return make_graph(n, e);
}

inline NetworkGraph make_star(int n) {
    std::vector<std::pair<int, int>> e;
    for (int i = 1; i < n; ++i) e.push_back({0, i});
    return make_graph(n, e);
}

// Sorted list of agents within kappa hops of i, including i itself.
// kappa >= diameter returns every agent.
inline std::vector<int> neighborhood(const NetworkGraph& g, int i, int kappa) {
    if (i < 0 || i >= g.n) throw std::invalid_argument("neighborhood: agent out of range");
    if (kappa < 0) throw std::invalid_argument("neighborhood: negative radius");
    std::vector<int> out;
    for (int j = 0; j < g.n; ++j)
        if (g.dist[i][j] <= kappa) out.push_back(j);
    return out;
}

// Largest kappa-hop neighborhood size over all agents.
inline int f_kappa(const NetworkGraph& g, int kappa) {
    int best = 0;
    for (int i = 0; i < g.n; ++i) best = std::max(best, int(neighborhood(g, i, kappa).size()));
    return best;
}

}  // namespace lpi
