// Command line front end: train / sweep / solve-exact / diagnose / plot.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "lpi/all.hpp"
#include "lpi/experiment.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::string out_root;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> cap;
    int threads = 0;
    bool quiet = false;
};

void add_common(CLI::App* sub, CommonArgs& a, bool with_run_flags) {
    sub->add_option("-c,--config", a.config_path, "JSON experiment config")->required();
    sub->add_option("-o,--out", a.out_root, "output root (default: $LPI_OUT_ROOT or ./runs)");
    sub->add_option("--cap", a.cap, "override the global state-action enumeration cap");
    if (with_run_flags) {
        sub->add_option("--seed", a.seed, "run a single seed instead of the configured list");
        sub->add_option("-j,--threads", a.threads, "worker threads (default: config, then hardware)");
        sub->add_flag("-q,--quiet", a.quiet, "suppress the per-point summary table");
    }
}

lpi::RunnerOptions runner_options(const CommonArgs& a) {
    lpi::RunnerOptions opt;
    opt.out_root = a.out_root;
    opt.seed_override = a.seed;
    opt.cap_override = a.cap;
    opt.threads_override = a.threads;
    opt.quiet = a.quiet;
    return opt;
}

void print_summary(const lpi::ExperimentSummary& sum) {
    std::printf("wrote %s\n", sum.dir.c_str());
    std::printf("%-14s %6s %6s %10s %12s %12s %12s\n", "point", "kappa", "beta", "tau", "ret_q25",
                "ret_median", "ret_q75");
    for (std::size_t p = 0; p < sum.points.size(); ++p) {
        const auto& pt = sum.points[p];
        const auto& st = sum.final_stats[p];
        std::printf("%-14s %6d %6d %10g %12.6f %12.6f %12.6f\n", pt.label.c_str(), pt.kappa,
                    pt.beta, pt.tau, st.q25, st.median, st.q75);
    }
    for (const auto& w : sum.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
    std::printf("wall time: %.1fs\n", sum.wall_seconds);
}

int cmd_train(const CommonArgs& a, bool allow_sweep) {
    lpi::ExperimentConfig cfg = lpi::load_experiment_config(a.config_path);
    if (!allow_sweep && (!cfg.sweep_kappa.empty() || !cfg.sweep_tau.empty()))
        throw lpi::ConfigError("config has a sweep section; use the sweep subcommand");
    lpi::ExperimentSummary sum = lpi::run_experiment(cfg, runner_options(a));
    if (!a.quiet) print_summary(sum);
    return 0;
}

std::string fmt17(double v) {
    char b[64];
    std::snprintf(b, sizeof b, "%.17g", v);
    return b;
}

int cmd_solve_exact(const CommonArgs& a, int iterations_flag) {
    lpi::ExperimentConfig cfg = lpi::load_experiment_config(a.config_path);
    lpi::FactoredMdp m = lpi::build_env(cfg.env);
    lpi::ExactOptions opts;
    opts.tol = cfg.exact_tol;
    opts.cap = a.cap.value_or(cfg.cap);
    int iters = iterations_flag > 0 ? iterations_flag : cfg.pi_iterations;

    std::string dir = lpi::resolve_out_dir(cfg, runner_options(a)) + "/exact";
    std::filesystem::create_directories(dir);

    lpi::PolicyIterationResult pi = lpi::exact_policy_iteration(m, iters, opts);

    std::ofstream vf(dir + "/v_star.csv");
    vf << "# lpi.values.v1\nstate";
    for (int i = 0; i < m.n(); ++i) vf << ",s" << i;
    vf << ",value\n";
    std::vector<int> tuple;
    for (std::int64_t s = 0; s < m.n_states(); ++s) {
        m.state_codec.decode(s, tuple);
        vf << s;
        for (int d : tuple) vf << ',' << d;
        vf << ',' << fmt17(pi.v_star[std::size_t(s)]) << '\n';
    }
    vf.close();

    std::ofstream tf(dir + "/pi_trace.csv");
    tf << "# lpi.pi-trace.v1\niteration,sup_gap\n";
    for (std::size_t k = 0; k < pi.trace.size(); ++k)
        tf << k << ',' << fmt17(pi.trace[k]) << '\n';
    tf.close();

    lpi::save_policy(pi.policy, dir + "/policy_star.txt");

    double j_star = lpi::objective(m, pi.v_star);
    std::printf("wrote %s\n", dir.c_str());
    std::printf("states %lld, actions %lld, gamma %g, tau %g\n",
                static_cast<long long>(m.n_states()), static_cast<long long>(m.n_actions()),
                m.gamma, m.tau);
    std::printf("J* = %.12f\n", j_star);
    std::printf("policy iteration gap: start %.3e, final %.3e after %d iterations\n", pi.trace.front(),
                pi.trace.back(), iters);
    double worst = 0.0;
    for (std::size_t k = 0; k + 1 < pi.trace.size(); ++k)
        if (pi.trace[k] > 1e-12) worst = std::max(worst, pi.trace[k + 1] / pi.trace[k]);
    std::printf("worst per-iteration contraction ratio: %.4f (gamma = %g)\n", worst, m.gamma);
    return 0;
}

int cmd_diagnose(const CommonArgs& a, double mu_flag, int beta_flag) {
    lpi::ExperimentConfig cfg = lpi::load_experiment_config(a.config_path);
    lpi::FactoredMdp m = lpi::build_env(cfg.env);
    double mu = mu_flag > 0 ? mu_flag : cfg.diag_mu;
    int beta = beta_flag >= 0 ? beta_flag : (cfg.diag_beta >= 0 ? cfg.diag_beta : cfg.lpi.beta);
    int kappa = cfg.lpi.kappa;

    std::string dir = lpi::resolve_out_dir(cfg, runner_options(a)) + "/diagnose";
    std::filesystem::create_directories(dir);

    lpi::DecayOptions dopts;
    lpi::ExactOptions xopts;
    xopts.tol = cfg.exact_tol;
    xopts.cap = a.cap.value_or(cfg.cap);

    lpi::Matrix c = lpi::c_matrix(m, dopts);
    lpi::write_matrix_csv(c, "kernel_interaction", dir + "/c_matrix.csv");
    lpi::DecayCertificate cc = lpi::decay_check(c, m.graph, mu);
    std::printf("kernel interaction: nu = %.6f at mu = %g (witness %s %d)\n", cc.nu, cc.mu,
                cc.from_row ? "row" : "column", cc.index);
    double plain_row_max = 0.0;
    lpi::DecayCertificate c0 = lpi::decay_check(c, m.graph, 0.0);
    for (double r : c0.row_sums) plain_row_max = std::max(plain_row_max, r);
    std::printf("kernel interaction: max plain row sum = %.6f (%s 1/2)\n", plain_row_max,
                plain_row_max < 0.5 ? "<" : ">=");

    lpi::JointPolicy zeta = lpi::uniform_policy(m, kappa);
    lpi::Matrix zp = lpi::policy_interaction(m, zeta, dopts);
    lpi::write_matrix_csv(zp, "policy_interaction", dir + "/policy_interaction.csv");
    lpi::DecayCertificate zc = lpi::decay_check(zp, m.graph, mu);
    std::printf("policy interaction (uniform, kappa=%d): nu = %.6f at mu = %g\n", kappa, zc.nu,
                zc.mu);

    if (m.n_pairs() <= xopts.cap) {
        std::vector<lpi::LocalQTable> qs;
        for (int i = 0; i < m.n(); ++i) qs.push_back(lpi::local_q(m, zeta, i, xopts));
        lpi::Matrix zq = lpi::q_interaction(m, qs, dopts);
        lpi::write_matrix_csv(zq, "value_interaction", dir + "/q_interaction.csv");
        lpi::DecayCertificate qc = lpi::decay_check(zq, m.graph, mu);
        std::printf("value interaction (uniform policy): nu = %.6f at mu = %g\n", qc.nu, qc.mu);

        const std::int64_t S = m.n_states(), A = m.n_actions();
        std::vector<double> qg(std::size_t(S * A), 0.0);
        for (std::int64_t z = 0; z < S * A; ++z) {
            double acc = 0.0;
            for (int i = 0; i < m.n(); ++i) acc += qs[std::size_t(i)].table[std::size_t(z)];
            qg[std::size_t(z)] = acc / double(m.n());
        }
        lpi::Matrix hq = lpi::second_order_interaction(m, qg, dopts);
        lpi::write_matrix_csv(hq, "second_order_interaction", dir + "/h_matrix.csv");
        lpi::DecayCertificate hc = lpi::decay_check(hq, m.graph, mu);
        std::printf("second order interaction: nu = %.6f at mu = %g\n", hc.nu, hc.mu);

        std::vector<lpi::TruncatedQ> trunc;
        for (int i = 0; i < m.n(); ++i)
            trunc.push_back(lpi::truncate_local_q(m, qs[std::size_t(i)], beta));
        lpi::TruncationReport tr = lpi::truncation_error(m, qs, trunc, mu, dopts);
        std::ofstream tf(dir + "/truncation.csv");
        tf << "# lpi.truncation.v1\nagent,empirical\n";
        for (std::size_t i = 0; i < tr.per_agent.size(); ++i)
            tf << i << ',' << fmt17(tr.per_agent[i]) << '\n';
        tf.close();
        std::printf("truncation at beta=%d: empirical %.6e <= bound %.6e (nu=%.4f, mu=%g): %s\n",
                    tr.beta, tr.empirical, tr.bound, tr.nu, tr.mu,
                    tr.empirical <= tr.bound ? "ok" : "VIOLATED");

        try {
            lpi::StationaryResult st = lpi::stationary_distribution(m, zeta, xopts);
            double xi = lpi::xi_min(m, st.dist, beta);
            std::printf("stationary chain: %s, recurrent states %lld, xi_min(beta=%d) = %.6e\n",
                        st.irreducible ? "irreducible" : "unichain with transient states",
                        static_cast<long long>(st.recurrent_size), beta, xi);
        } catch (const std::exception& e) {
            std::printf("stationary chain: unavailable (%s)\n", e.what());
        }
    } else {
        std::printf("value/second-order diagnostics skipped: %lld state-action pairs exceed cap %lld\n",
                    static_cast<long long>(m.n_pairs()), static_cast<long long>(xopts.cap));
    }
    std::printf("wrote %s\n", dir.c_str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Localized policy training and diagnostics for networked agents"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "lpi 1.0.0");

    CommonArgs train_args, sweep_args, exact_args, diag_args;
    int exact_iterations = 0;
    double diag_mu = 0.0;
    int diag_beta = -1;
    std::string plot_dir;

    CLI::App* train = app.add_subcommand("train", "run the configured training loop");
    add_common(train, train_args, true);
    CLI::App* sweep = app.add_subcommand("sweep", "run the configured sweep grid");
    add_common(sweep, sweep_args, true);
    CLI::App* exact = app.add_subcommand("solve-exact", "exact solve of a small instance");
    add_common(exact, exact_args, false);
    exact->add_option("--iterations", exact_iterations, "policy iteration count (default: config)");
    CLI::App* diag = app.add_subcommand("diagnose", "interaction matrices and decay certificates");
    add_common(diag, diag_args, false);
    diag->add_option("--mu", diag_mu, "decay exponent for certificates (default: config)");
    diag->add_option("--beta", diag_beta, "truncation radius (default: config)");
    CLI::App* plot = app.add_subcommand("plot", "rebuild the SVG plot for a finished run");
    plot->add_option("-d,--dir", plot_dir, "experiment output directory")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return cmd_train(train_args, false);
        if (sweep->parsed()) return cmd_train(sweep_args, true);
        if (exact->parsed()) return cmd_solve_exact(exact_args, exact_iterations);
        if (diag->parsed()) return cmd_diagnose(diag_args, diag_mu, diag_beta);
        if (plot->parsed()) {
            std::printf("wrote %s\n", lpi::plot_experiment(plot_dir).c_str());
            return 0;
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
