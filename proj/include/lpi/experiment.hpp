#pragma once

// Experiment harness: JSON config -> sweep of training runs -> CSV metrics,
// aggregates, and an SVG plot. Unknown config keys are hard errors so typos
// don't silently fall back to defaults. All output files are deterministic
// for a fixed config (no timestamps, no wall-clock columns).

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "lpi/envs.hpp"
#include "lpi/lpi.hpp"
#include "lpi/mdp_io.hpp"
#include "lpi/policy.hpp"
#include "lpi/svg.hpp"

namespace lpi {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void check_keys(const nlohmann::json& j, const std::string& path,
                       std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw ConfigError(path + ": expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) { ok = true; break; }
        if (!ok) throw ConfigError(path + "/" + it.key() + ": unknown key");
    }
}

template <class T>
T get_req(const nlohmann::json& j, const std::string& path, const char* key) {
    if (!j.contains(key)) throw ConfigError(path + "/" + key + ": missing");
    try {
        return j.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(path + "/" + key + ": " + e.what());
    }
}

template <class T>
T get_opt(const nlohmann::json& j, const std::string& path, const char* key, T dflt) {
    if (!j.contains(key)) return dflt;
    return get_req<T>(j, path, key);
}

inline std::string fmt17(double v) {
    if (std::isnan(v)) return "";
    char b[64];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

inline std::string fmt_g(double v) {
    char b[64];
    std::snprintf(b, sizeof b, "%g", v);
    return b;
}

}  // namespace detail

struct EnvSpec {
    std::string kind;  // "spreading" | "random" | "file"
    SpreadingParams spreading;
    RandomMdpParams random;
    std::string file;
};

struct ExperimentConfig {
    std::string name = "experiment";
    std::string out_dir;  // empty: resolved from CLI flag / LPI_OUT_ROOT / "runs"
    bool save_policies = false;
    EnvSpec env;
    LPIConfig lpi;  // base run config; tau mirrors the env setting
    bool beta_given = false;
    double exact_tol = 1e-9;
    std::int64_t cap = std::int64_t{1} << 20;
    int pi_iterations = 20;
    std::vector<std::uint64_t> seeds{1};
    std::vector<int> sweep_kappa;   // empty: just lpi.kappa
    std::vector<double> sweep_tau;  // empty: just the env tau
    int threads = 0;                // 0: hardware concurrency
    double diag_mu = 1.0;
    int diag_beta = -1;  // -1: use lpi.beta
};

inline ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
    ExperimentConfig cfg;
    detail::check_keys(j, "", {"experiment", "env", "lpi", "exact", "seeds", "sweep", "threads",
                               "diagnose"});

    if (j.contains("experiment")) {
        const auto& e = j["experiment"];
        detail::check_keys(e, "experiment", {"name", "out_dir", "save_policies"});
        cfg.name = detail::get_opt<std::string>(e, "experiment", "name", cfg.name);
        cfg.out_dir = detail::get_opt<std::string>(e, "experiment", "out_dir", "");
        cfg.save_policies = detail::get_opt<bool>(e, "experiment", "save_policies", false);
    }

    if (!j.contains("env")) throw ConfigError("env: missing");
    const auto& e = j["env"];
    cfg.env.kind = detail::get_req<std::string>(e, "env", "kind");
    if (cfg.env.kind == "spreading") {
        detail::check_keys(e, "env", {"kind", "n", "p1", "p2", "cost", "p_eff", "gamma", "tau"});
        auto& p = cfg.env.spreading;
        p.n = detail::get_opt<int>(e, "env", "n", p.n);
        p.p1 = detail::get_opt<double>(e, "env", "p1", p.p1);
        p.p2 = detail::get_opt<double>(e, "env", "p2", p.p2);
        p.cost = detail::get_opt<double>(e, "env", "cost", p.cost);
        p.p_eff = detail::get_opt<double>(e, "env", "p_eff", p.p_eff);
        p.gamma = detail::get_opt<double>(e, "env", "gamma", p.gamma);
        p.tau = detail::get_opt<double>(e, "env", "tau", p.tau);
        cfg.lpi.tau = p.tau;
    } else if (cfg.env.kind == "random") {
        detail::check_keys(e, "env",
                           {"kind", "n", "graph", "state_size", "action_size", "gamma", "tau",
                            "r_bar", "eps_c", "min_prob", "seed"});
        auto& p = cfg.env.random;
        p.n = detail::get_opt<int>(e, "env", "n", p.n);
        p.graph = detail::get_opt<std::string>(e, "env", "graph", p.graph);
        p.state_size = detail::get_opt<int>(e, "env", "state_size", p.state_size);
        p.action_size = detail::get_opt<int>(e, "env", "action_size", p.action_size);
        p.gamma = detail::get_opt<double>(e, "env", "gamma", p.gamma);
        p.tau = detail::get_opt<double>(e, "env", "tau", p.tau);
        p.r_bar = detail::get_opt<double>(e, "env", "r_bar", p.r_bar);
        p.eps_c = detail::get_opt<double>(e, "env", "eps_c", p.eps_c);
        p.min_prob = detail::get_opt<double>(e, "env", "min_prob", p.min_prob);
        p.seed = detail::get_opt<std::uint64_t>(e, "env", "seed", p.seed);
        cfg.lpi.tau = p.tau;
    } else if (cfg.env.kind == "file") {
        detail::check_keys(e, "env", {"kind", "path"});
        cfg.env.file = detail::get_req<std::string>(e, "env", "path");
        // cfg.lpi.tau is picked up from the loaded model at run time
    } else {
        throw ConfigError("env/kind: expected spreading, random, or file");
    }

    if (j.contains("lpi")) {
        const auto& l = j["lpi"];
        detail::check_keys(l, "lpi",
                           {"kappa", "beta", "eta", "p_max", "M", "T", "return_episodes",
                            "exact_metrics", "eval"});
        cfg.lpi.kappa = detail::get_opt<int>(l, "lpi", "kappa", cfg.lpi.kappa);
        if (l.contains("beta")) {
            cfg.lpi.beta = detail::get_req<int>(l, "lpi", "beta");
            cfg.beta_given = true;
        }
        cfg.lpi.eta = detail::get_opt<double>(l, "lpi", "eta", cfg.lpi.eta);
        cfg.lpi.p_max = detail::get_opt<int>(l, "lpi", "p_max", cfg.lpi.p_max);
        cfg.lpi.M = detail::get_opt<int>(l, "lpi", "M", cfg.lpi.M);
        cfg.lpi.T = detail::get_opt<std::int64_t>(l, "lpi", "T", cfg.lpi.T);
        cfg.lpi.return_episodes =
            detail::get_opt<int>(l, "lpi", "return_episodes", cfg.lpi.return_episodes);
        cfg.lpi.exact_metrics =
            detail::get_opt<bool>(l, "lpi", "exact_metrics", cfg.lpi.exact_metrics);
        if (l.contains("eval")) {
            const auto& ev = l["eval"];
            detail::check_keys(ev, "lpi/eval",
                               {"kind", "schedule", "alpha", "anneal_every", "anneal_factor", "xi",
                                "k2"});
            cfg.lpi.eval_kind =
                detail::get_opt<std::string>(ev, "lpi/eval", "kind", cfg.lpi.eval_kind);
            cfg.lpi.td_schedule =
                detail::get_opt<std::string>(ev, "lpi/eval", "schedule", cfg.lpi.td_schedule);
            cfg.lpi.td_alpha = detail::get_opt<double>(ev, "lpi/eval", "alpha", cfg.lpi.td_alpha);
            cfg.lpi.td_anneal_every =
                detail::get_opt<std::int64_t>(ev, "lpi/eval", "anneal_every", cfg.lpi.td_anneal_every);
            cfg.lpi.td_anneal_factor =
                detail::get_opt<double>(ev, "lpi/eval", "anneal_factor", cfg.lpi.td_anneal_factor);
            cfg.lpi.td_xi = detail::get_opt<double>(ev, "lpi/eval", "xi", cfg.lpi.td_xi);
            cfg.lpi.td_k2 = detail::get_opt<double>(ev, "lpi/eval", "k2", cfg.lpi.td_k2);
        }
    }
    if (!cfg.beta_given) cfg.lpi.beta = cfg.lpi.kappa;

    if (j.contains("exact")) {
        const auto& x = j["exact"];
        detail::check_keys(x, "exact", {"tol", "cap", "pi_iterations"});
        cfg.exact_tol = detail::get_opt<double>(x, "exact", "tol", cfg.exact_tol);
        cfg.cap = detail::get_opt<std::int64_t>(x, "exact", "cap", cfg.cap);
        cfg.pi_iterations = detail::get_opt<int>(x, "exact", "pi_iterations", cfg.pi_iterations);
    }

    if (j.contains("seeds")) {
        cfg.seeds = detail::get_req<std::vector<std::uint64_t>>(j, "", "seeds");
        if (cfg.seeds.empty()) throw ConfigError("seeds: must be non-empty");
    }

    if (j.contains("sweep")) {
        const auto& s = j["sweep"];
        detail::check_keys(s, "sweep", {"kappa", "tau"});
        cfg.sweep_kappa = detail::get_opt<std::vector<int>>(s, "sweep", "kappa", {});
        cfg.sweep_tau = detail::get_opt<std::vector<double>>(s, "sweep", "tau", {});
        if (!cfg.sweep_tau.empty() && cfg.env.kind == "file")
            for (double t : cfg.sweep_tau)
                if (t < 0) throw ConfigError("sweep/tau: negative value");
    }

    cfg.threads = detail::get_opt<int>(j, "", "threads", 0);

    if (j.contains("diagnose")) {
        const auto& d = j["diagnose"];
        detail::check_keys(d, "diagnose", {"mu", "beta"});
        cfg.diag_mu = detail::get_opt<double>(d, "diagnose", "mu", cfg.diag_mu);
        cfg.diag_beta = detail::get_opt<int>(d, "diagnose", "beta", cfg.diag_beta);
    }
    return cfg;
}

inline ExperimentConfig load_experiment_config(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open " + path);
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(f);
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(path + ": " + e.what());
    }
    return parse_experiment_config(j);
}

inline FactoredMdp build_env(const EnvSpec& spec) {
    if (spec.kind == "spreading") return spreading_env(spec.spreading);
    if (spec.kind == "random") return random_factored_mdp(spec.random);
    if (spec.kind == "file") return load_mdp(spec.file);
    throw ConfigError("env/kind: expected spreading, random, or file");
}

struct SweepPoint {
    int kappa = 0;
    int beta = 0;
    double tau = 0;
    std::string label;  // used in file names, e.g. "k2_t0.05"
};

inline std::vector<SweepPoint> expand_sweep(const ExperimentConfig& cfg, double base_tau) {
    std::vector<int> kappas = cfg.sweep_kappa.empty() ? std::vector<int>{cfg.lpi.kappa}
                                                      : cfg.sweep_kappa;
    std::vector<double> taus =
        cfg.sweep_tau.empty() ? std::vector<double>{base_tau} : cfg.sweep_tau;
    std::vector<SweepPoint> pts;
    for (int k : kappas)
        for (double t : taus) {
            SweepPoint p;
            p.kappa = k;
            p.beta = cfg.beta_given ? cfg.lpi.beta : k;
            p.tau = t;
            p.label = "k" + std::to_string(k) + "_t" + detail::fmt_g(t);
            pts.push_back(p);
        }
    return pts;
}

// R-7 quantile (linear interpolation between order statistics).
inline double quantile(std::vector<double> v, double p) {
    if (v.empty()) throw std::invalid_argument("quantile of empty sample");
    std::sort(v.begin(), v.end());
    double h = (static_cast<double>(v.size()) - 1.0) * p;
    auto lo = static_cast<std::size_t>(h);
    if (lo + 1 >= v.size()) return v.back();
    return v[lo] + (h - lo) * (v[lo + 1] - v[lo]);
}

inline void write_metrics_csv(const std::string& path, const RunMetrics& m) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "# lpi.metrics.v1\n";
    f << "iteration,return_estimate,sigma_regularity,exact_j,value_gap\n";
    for (const auto& r : m.rows)
        f << r.iteration << ',' << detail::fmt17(r.return_estimate) << ','
          << detail::fmt17(r.sigma_regularity) << ',' << detail::fmt17(r.exact_j) << ','
          << detail::fmt17(r.value_gap) << '\n';
}

struct AggRow {
    int iteration = 0;
    double q25 = 0, median = 0, q75 = 0, sigma_median = 0;
};

inline std::vector<AggRow> aggregate_metrics(const std::vector<RunMetrics>& runs) {
    if (runs.empty()) return {};
    std::size_t rows = runs.front().rows.size();
    for (const auto& r : runs)
        if (r.rows.size() != rows)
            throw std::runtime_error("metric row counts differ across seeds");
    std::vector<AggRow> out(rows);
    for (std::size_t t = 0; t < rows; ++t) {
        std::vector<double> ret, sig;
        for (const auto& r : runs) {
            ret.push_back(r.rows[t].return_estimate);
            sig.push_back(r.rows[t].sigma_regularity);
        }
        out[t].iteration = runs.front().rows[t].iteration;
        out[t].q25 = quantile(ret, 0.25);
        out[t].median = quantile(ret, 0.50);
        out[t].q75 = quantile(ret, 0.75);
        out[t].sigma_median = quantile(sig, 0.50);
    }
    return out;
}

inline void write_agg_csv(const std::string& path, const std::vector<AggRow>& rows) {
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << "# lpi.metrics.agg.v1\n";
    f << "iteration,return_q25,return_median,return_q75,sigma_median\n";
    for (const auto& r : rows)
        f << r.iteration << ',' << detail::fmt17(r.q25) << ',' << detail::fmt17(r.median) << ','
          << detail::fmt17(r.q75) << ',' << detail::fmt17(r.sigma_median) << '\n';
}

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<double>> cols;
    std::size_t rows() const { return cols.empty() ? 0 : cols.front().size(); }
};

inline CsvTable read_csv(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path);
    CsvTable t;
    std::string line;
    bool have_header = false;
    while (std::getline(f, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty() || line.front() == '#') continue;
        std::vector<std::string> cells;
        std::string cell;
        std::stringstream ss(line);
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.push_back("");
        if (!have_header) {
            t.header = cells;
            t.cols.assign(cells.size(), {});
            have_header = true;
            continue;
        }
        if (cells.size() != t.header.size())
            throw std::runtime_error(path + ": ragged row '" + line + "'");
        for (std::size_t k = 0; k < cells.size(); ++k)
            t.cols[k].push_back(cells[k].empty() ? std::nan("")
                                                 : std::strtod(cells[k].c_str(), nullptr));
    }
    if (!have_header) throw std::runtime_error(path + ": no header row");
    return t;
}

struct RunnerOptions {
    std::string out_root;  // overrides config/out_dir resolution when set
    std::optional<std::uint64_t> seed_override;
    std::optional<std::int64_t> cap_override;
    int threads_override = 0;
    bool quiet = false;
};

struct ExperimentSummary {
    std::string dir;
    std::vector<SweepPoint> points;
    std::vector<AggRow> final_stats;  // one per point, last outer iteration
    std::vector<std::string> warnings;
    double wall_seconds = 0;
};

inline std::string resolve_out_dir(const ExperimentConfig& cfg, const RunnerOptions& opt) {
    std::string root = opt.out_root;
    if (root.empty() && !cfg.out_dir.empty()) root = cfg.out_dir;
    if (root.empty())
        if (const char* env = std::getenv("LPI_OUT_ROOT")) root = env;
    if (root.empty()) root = "runs";
    return root + "/" + cfg.name;
}

inline void write_manifest(const std::string& path, const ExperimentConfig& cfg,
                           const std::vector<SweepPoint>& points,
                           const std::vector<std::uint64_t>& seeds, int threads) {
    nlohmann::json j;
    j["schema"] = "lpi.manifest.v1";
    j["name"] = cfg.name;
    nlohmann::json env;
    env["kind"] = cfg.env.kind;
    if (cfg.env.kind == "spreading") {
        const auto& p = cfg.env.spreading;
        env["n"] = p.n; env["p1"] = p.p1; env["p2"] = p.p2; env["cost"] = p.cost;
        env["p_eff"] = p.p_eff; env["gamma"] = p.gamma; env["tau"] = p.tau;
    } else if (cfg.env.kind == "random") {
        const auto& p = cfg.env.random;
        env["n"] = p.n; env["graph"] = p.graph; env["state_size"] = p.state_size;
        env["action_size"] = p.action_size; env["gamma"] = p.gamma; env["tau"] = p.tau;
        env["r_bar"] = p.r_bar; env["eps_c"] = p.eps_c; env["min_prob"] = p.min_prob;
        env["seed"] = p.seed;
    } else {
        env["path"] = cfg.env.file;
    }
    j["env"] = env;
    nlohmann::json l;
    l["kappa"] = cfg.lpi.kappa; l["beta"] = cfg.lpi.beta; l["eta"] = cfg.lpi.eta;
    l["p_max"] = cfg.lpi.p_max; l["M"] = cfg.lpi.M; l["T"] = cfg.lpi.T;
    l["return_episodes"] = cfg.lpi.return_episodes; l["exact_metrics"] = cfg.lpi.exact_metrics;
    l["eval"] = {{"kind", cfg.lpi.eval_kind}, {"schedule", cfg.lpi.td_schedule},
                 {"alpha", cfg.lpi.td_alpha}, {"anneal_every", cfg.lpi.td_anneal_every},
                 {"anneal_factor", cfg.lpi.td_anneal_factor}, {"xi", cfg.lpi.td_xi},
                 {"k2", cfg.lpi.td_k2}};
    j["lpi"] = l;
    j["exact"] = {{"tol", cfg.exact_tol}, {"cap", cfg.cap}, {"pi_iterations", cfg.pi_iterations}};
    j["seeds"] = seeds;
    nlohmann::json pts = nlohmann::json::array();
    for (const auto& p : points)
        pts.push_back({{"label", p.label}, {"kappa", p.kappa}, {"beta", p.beta}, {"tau", p.tau}});
    j["points"] = pts;
    j["threads"] = threads;
    std::ofstream f(path);
    if (!f) throw std::runtime_error("cannot open " + path + " for writing");
    f << j.dump(2) << '\n';
}

inline const char* palette_color(std::size_t k) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
    return colors[k % (sizeof colors / sizeof colors[0])];
}

inline void write_returns_svg(const std::string& path, const std::string& title,
                              const std::vector<SweepPoint>& points,
                              const std::vector<std::vector<AggRow>>& aggs) {
    std::vector<SvgSeries> series;
    std::vector<SvgBand> bands;
    for (std::size_t p = 0; p < points.size(); ++p) {
        SvgSeries s;
        s.name = points[p].label;
        s.color = palette_color(p);
        SvgBand b;
        b.color = s.color;
        for (const auto& r : aggs[p]) {
            s.points.emplace_back(static_cast<double>(r.iteration), r.median);
            b.points.push_back({static_cast<double>(r.iteration), r.q25, r.q75});
        }
        series.push_back(std::move(s));
        bands.push_back(std::move(b));
    }
    write_svg_chart(path, title, "outer iteration", "return estimate", series, bands);
}

inline ExperimentSummary run_experiment(const ExperimentConfig& cfg, const RunnerOptions& opt) {
    auto t_start = std::chrono::steady_clock::now();
    ExperimentSummary sum;
    sum.dir = resolve_out_dir(cfg, opt);
    std::filesystem::create_directories(sum.dir);

    FactoredMdp base = build_env(cfg.env);
    sum.points = expand_sweep(cfg, base.tau);
    std::vector<std::uint64_t> seeds =
        opt.seed_override ? std::vector<std::uint64_t>{*opt.seed_override} : cfg.seeds;

    std::vector<FactoredMdp> mdps;
    mdps.reserve(sum.points.size());
    for (const auto& p : sum.points) {
        if (p.tau < 0) throw ConfigError("sweep/tau: negative value");
        FactoredMdp mp = base;
        mp.tau = p.tau;
        mdps.push_back(std::move(mp));
    }

    int threads = opt.threads_override > 0 ? opt.threads_override : cfg.threads;
    if (threads <= 0) threads = static_cast<int>(std::thread::hardware_concurrency());
    if (threads <= 0) threads = 1;
    std::size_t n_tasks = sum.points.size() * seeds.size();
    threads = static_cast<int>(std::min<std::size_t>(threads, n_tasks));

    write_manifest(sum.dir + "/manifest.json", cfg, sum.points, seeds, threads);

    std::vector<RunMetrics> metrics(n_tasks);
    std::vector<JointPolicy> policies(cfg.save_policies ? n_tasks : 0);
    std::vector<std::exception_ptr> errors(n_tasks);
    std::atomic<std::size_t> next{0};

    auto worker = [&]() {
        for (;;) {
            std::size_t k = next.fetch_add(1);
            if (k >= n_tasks) return;
            std::size_t p = k / seeds.size(), s = k % seeds.size();
            try {
                LPIConfig c = cfg.lpi;
                c.kappa = sum.points[p].kappa;
                c.beta = sum.points[p].beta;
                c.tau = sum.points[p].tau;
                c.seed = seeds[s];
                c.exact_tol = cfg.exact_tol;
                c.cap = opt.cap_override.value_or(cfg.cap);
                auto ev = make_evaluator(mdps[p], c);
                LpiResult r = lpi_run(mdps[p], c, *ev);
                metrics[k] = std::move(r.metrics);
                if (cfg.save_policies) policies[k] = std::move(r.policy);
            } catch (...) {
                errors[k] = std::current_exception();
            }
        }
    };
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (std::size_t k = 0; k < n_tasks; ++k)
        if (errors[k]) std::rethrow_exception(errors[k]);

    std::vector<std::vector<AggRow>> aggs;
    std::ofstream summary_csv(sum.dir + "/sweep_summary.csv");
    if (!summary_csv)
        throw std::runtime_error("cannot open " + sum.dir + "/sweep_summary.csv for writing");
    summary_csv << "# lpi.sweep.v1\n";
    summary_csv << "label,kappa,beta,tau,return_q25,return_median,return_q75,sigma_median\n";
    for (std::size_t p = 0; p < sum.points.size(); ++p) {
        std::vector<RunMetrics> per_seed;
        for (std::size_t s = 0; s < seeds.size(); ++s) {
            std::size_t k = p * seeds.size() + s;
            write_metrics_csv(sum.dir + "/metrics_" + sum.points[p].label + "_seed" +
                                  std::to_string(seeds[s]) + ".csv",
                              metrics[k]);
            if (cfg.save_policies)
                save_policy(policies[k], sum.dir + "/policy_" + sum.points[p].label + "_seed" +
                                             std::to_string(seeds[s]) + ".txt");
            for (const auto& w : metrics[k].warnings)
                sum.warnings.push_back(sum.points[p].label + " seed " +
                                       std::to_string(seeds[s]) + ": " + w);
            per_seed.push_back(metrics[k]);
        }
        auto agg = aggregate_metrics(per_seed);
        write_agg_csv(sum.dir + "/agg_" + sum.points[p].label + ".csv", agg);
        const AggRow& fin = agg.back();
        sum.final_stats.push_back(fin);
        summary_csv << sum.points[p].label << ',' << sum.points[p].kappa << ','
                    << sum.points[p].beta << ',' << detail::fmt17(sum.points[p].tau) << ','
                    << detail::fmt17(fin.q25) << ',' << detail::fmt17(fin.median) << ','
                    << detail::fmt17(fin.q75) << ',' << detail::fmt17(fin.sigma_median) << '\n';
        aggs.push_back(std::move(agg));
    }
    summary_csv.close();
    write_returns_svg(sum.dir + "/returns.svg", cfg.name, sum.points, aggs);

    sum.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();
    return sum;
}

// Rebuild returns.svg for an already-run experiment directory.
inline std::string plot_experiment(const std::string& dir) {
    std::ifstream f(dir + "/manifest.json");
    if (!f) throw std::runtime_error("cannot open " + dir + "/manifest.json");
    nlohmann::json j = nlohmann::json::parse(f);
    std::string name = j.at("name").get<std::string>();
    std::vector<SweepPoint> points;
    std::vector<std::vector<AggRow>> aggs;
    for (const auto& pj : j.at("points")) {
        SweepPoint p;
        p.label = pj.at("label").get<std::string>();
        p.kappa = pj.at("kappa").get<int>();
        p.beta = pj.at("beta").get<int>();
        p.tau = pj.at("tau").get<double>();
        CsvTable t = read_csv(dir + "/agg_" + p.label + ".csv");
        std::vector<AggRow> agg(t.rows());
        for (std::size_t r = 0; r < t.rows(); ++r) {
            agg[r].iteration = static_cast<int>(t.cols[0][r]);
            agg[r].q25 = t.cols[1][r];
            agg[r].median = t.cols[2][r];
            agg[r].q75 = t.cols[3][r];
            agg[r].sigma_median = t.cols[4][r];
        }
        points.push_back(p);
        aggs.push_back(std::move(agg));
    }
    std::string out = dir + "/returns.svg";
    write_returns_svg(out, name, points, aggs);
    return out;
}

}  // namespace lpi
