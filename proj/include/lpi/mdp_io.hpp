#pragma once

// JSON load/save for factored MDPs. Kept separate from mdp.hpp so the core
// headers stay independent of the JSON library.
//
// Format "lpi.mdp.v1": sizes and coupling graph, per-agent flat kernel
// tables (neighborhood-state major, then own action, then next local state;
// the neighborhood index uses mixed radix over the sorted closed 1-hop
// neighborhood with the first member as the fastest digit), per-agent flat
// reward tables (local-state major, then action), optional mixture-of-
// products initial distribution.

#include <fstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "lpi/mdp.hpp"

namespace lpi {

inline void save_mdp(const FactoredMdp& m, const std::string& path) {
    nlohmann::json j;
    j["format"] = "lpi.mdp.v1";
    j["n"] = m.n();
    std::vector<std::vector<int>> edges;
    for (int i = 0; i < m.n(); ++i)
        for (int b : m.graph.adj[i])
            if (i < b) edges.push_back({i, b});
    j["edges"] = edges;
    j["state_sizes"] = m.state_sizes;
    j["action_sizes"] = m.action_sizes;
    j["gamma"] = m.gamma;
    j["tau"] = m.tau;
    j["r_bar"] = m.r_bar;
    j["default_state"] = m.default_state;
    j["default_action"] = m.default_action;
    j["kernels"] = m.kernels;
    j["rewards"] = m.rewards;
    nlohmann::json rho;
    rho["weights"] = m.rho.weights;
    rho["components"] = m.rho.comps;
    j["rho"] = rho;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << j.dump(2) << '\n';
}

inline FactoredMdp load_mdp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw std::runtime_error(path + ": " + e.what());
    }
    if (!j.contains("format") || j["format"] != "lpi.mdp.v1")
        throw std::runtime_error(path + ": expected format lpi.mdp.v1");

    FactoredMdp m;
    int n = j.at("n").get<int>();
    std::vector<std::pair<int, int>> edges;
    for (const auto& e : j.at("edges")) {
        if (!e.is_array() || e.size() != 2)
            throw std::runtime_error(path + ": each edge must be a pair");
        edges.emplace_back(e[0].get<int>(), e[1].get<int>());
    }
    m.graph = make_graph(n, edges);
    m.state_sizes = j.at("state_sizes").get<std::vector<int>>();
    m.action_sizes = j.at("action_sizes").get<std::vector<int>>();
    m.gamma = j.at("gamma").get<double>();
    m.tau = j.at("tau").get<double>();
    m.r_bar = j.at("r_bar").get<double>();
    if (j.contains("default_state")) m.default_state = j["default_state"].get<std::vector<int>>();
    if (j.contains("default_action")) m.default_action = j["default_action"].get<std::vector<int>>();
    m.kernels = j.at("kernels").get<std::vector<std::vector<double>>>();
    m.rewards = j.at("rewards").get<std::vector<std::vector<double>>>();
    if (j.contains("rho")) {
        m.rho.weights = j["rho"].at("weights").get<std::vector<double>>();
        m.rho.comps =
            j["rho"].at("components").get<std::vector<std::vector<std::vector<double>>>>();
    }
    m.finalize();
    return m;
}

}  // namespace lpi
