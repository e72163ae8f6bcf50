#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "lpi/experiment.hpp"
#include "test_helpers.hpp"

using namespace lpi;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    REQUIRE(f);
    std::ostringstream ss;
    ss << f.rdbuf();
    return ss.str();
}

nlohmann::json parse(const char* text) { return nlohmann::json::parse(text); }

}  // namespace

TEST_CASE("a minimal config fills in the defaults", "[experiment]") {
    ExperimentConfig cfg = parse_experiment_config(parse(R"({"env": {"kind": "random"}})"));
    CHECK(cfg.name == "experiment");
    CHECK(cfg.env.kind == "random");
    CHECK(cfg.lpi.kappa == 1);
    CHECK(cfg.lpi.beta == 1);
    CHECK_FALSE(cfg.beta_given);
    CHECK(cfg.lpi.tau == 1.0);  // mirrors the random env default
    CHECK(cfg.seeds == std::vector<std::uint64_t>{1});
    CHECK(cfg.sweep_kappa.empty());
    CHECK(cfg.exact_tol == 1e-9);
}

TEST_CASE("the policy radius defaults to the evaluation radius", "[experiment]") {
    auto a = parse_experiment_config(
        parse(R"({"env": {"kind": "random"}, "lpi": {"kappa": 2}})"));
    CHECK(a.lpi.kappa == 2);
    CHECK(a.lpi.beta == 2);

    auto b = parse_experiment_config(
        parse(R"({"env": {"kind": "random"}, "lpi": {"kappa": 2, "beta": 3}})"));
    CHECK(b.lpi.beta == 3);
    CHECK(b.beta_given);
}

TEST_CASE("unknown or missing keys are reported with their path", "[experiment]") {
    CHECK_THROWS_WITH(parse_experiment_config(
                          parse(R"({"env": {"kind": "random"}, "lpi": {"foo": 1}})")),
                      Catch::Matchers::ContainsSubstring("lpi/foo"));
    CHECK_THROWS_WITH(parse_experiment_config(parse(R"({})")),
                      Catch::Matchers::ContainsSubstring("env"));
    CHECK_THROWS_AS(parse_experiment_config(parse(R"({"env": {"kind": "maze"}})")), ConfigError);
    CHECK_THROWS_WITH(parse_experiment_config(parse(R"({"env": {"kind": "file"}})")),
                      Catch::Matchers::ContainsSubstring("env/path"));
    CHECK_THROWS_AS(parse_experiment_config(
                        parse(R"({"env": {"kind": "random"}, "seeds": []})")),
                    ConfigError);
}

TEST_CASE("sweep points combine radii and temperatures into labels", "[experiment]") {
    ExperimentConfig cfg = parse_experiment_config(parse(
        R"({"env": {"kind": "random", "tau": 0.1}, "sweep": {"kappa": [0, 2]}})"));
    auto pts = expand_sweep(cfg, 0.1);
    REQUIRE(pts.size() == 2u);
    CHECK(pts[0].label == "k0_t0.1");
    CHECK(pts[1].label == "k2_t0.1");
    CHECK(pts[0].beta == 0);  // beta follows kappa when not pinned
    CHECK(pts[1].beta == 2);

    cfg.sweep_tau = {0.1, 0.5};
    auto grid = expand_sweep(cfg, 0.1);
    REQUIRE(grid.size() == 4u);
    CHECK(grid[1].label == "k0_t0.5");
    CHECK(grid[3].tau == 0.5);
}

TEST_CASE("quantiles interpolate between order statistics", "[experiment]") {
    std::vector<double> v{4.0, 2.0, 3.0, 1.0};
    CHECK(quantile(v, 0.25) == Catch::Approx(1.75));
    CHECK(quantile(v, 0.5) == Catch::Approx(2.5));
    CHECK(quantile(v, 0.75) == Catch::Approx(3.25));
    CHECK(quantile(v, 0.0) == 1.0);
    CHECK(quantile(v, 1.0) == 4.0);
    CHECK(quantile({5.0}, 0.5) == 5.0);
    CHECK_THROWS_AS(quantile({}, 0.5), std::invalid_argument);
}

TEST_CASE("metric tables survive a csv round trip", "[experiment]") {
    RunMetrics m;
    m.rows.resize(2);
    m.rows[0].iteration = 0;
    m.rows[0].return_estimate = 1.0 / 3.0;
    m.rows[0].sigma_regularity = 0.0;
    m.rows[1].iteration = 1;
    m.rows[1].return_estimate = -2.5;
    m.rows[1].sigma_regularity = 7.25;
    m.rows[1].exact_j = 0.125;
    m.rows[1].value_gap = 1e-17;

    fs::path p = fs::temp_directory_path() / "lpi_metrics_roundtrip.csv";
    write_metrics_csv(p.string(), m);
    CsvTable t = read_csv(p.string());
    REQUIRE(t.header ==
            std::vector<std::string>{"iteration", "return_estimate", "sigma_regularity", "exact_j",
                                     "value_gap"});
    REQUIRE(t.rows() == 2u);
    CHECK(t.cols[1][0] == 1.0 / 3.0);  // %.17g preserves doubles exactly
    CHECK(std::isnan(t.cols[3][0]));   // blank cell reads back as nan
    CHECK(t.cols[3][1] == 0.125);
    CHECK(t.cols[4][1] == 1e-17);
    fs::remove(p);
}

TEST_CASE("ragged csv rows are rejected", "[experiment]") {
    fs::path p = fs::temp_directory_path() / "lpi_ragged.csv";
    {
        std::ofstream f(p);
        f << "# comment\na,b\n1,2\n3\n";
    }
    CHECK_THROWS_AS(read_csv(p.string()), std::runtime_error);
    fs::remove(p);
}

TEST_CASE("model files round trip through json", "[experiment]") {
    FactoredMdp m = testenv::chain2_env();
    fs::path p = fs::temp_directory_path() / "lpi_model_roundtrip.json";
    save_mdp(m, p.string());
    FactoredMdp back = load_mdp(p.string());
    CHECK(back.n() == 2);
    CHECK(back.gamma == m.gamma);
    CHECK(back.tau == m.tau);
    CHECK(back.r_bar == m.r_bar);
    CHECK(back.kernels == m.kernels);
    CHECK(back.rewards == m.rewards);
    CHECK(back.state_sizes == m.state_sizes);
    fs::remove(p);
}

TEST_CASE("experiments write a complete, reproducible output tree", "[experiment]") {
    const char* text = R"({
        "experiment": {"name": "tiny"},
        "env": {"kind": "random", "n": 2, "seed": 3},
        "lpi": {"kappa": 1, "M": 1, "T": 50, "p_max": 2, "return_episodes": 4},
        "seeds": [1, 2],
        "sweep": {"kappa": [0, 1]},
        "threads": 2
    })";
    ExperimentConfig cfg = parse_experiment_config(parse(text));

    fs::path root_a = fs::temp_directory_path() / "lpi_exp_a";
    fs::path root_b = fs::temp_directory_path() / "lpi_exp_b";
    fs::remove_all(root_a);
    fs::remove_all(root_b);

    RunnerOptions opt;
    opt.quiet = true;
    opt.out_root = root_a.string();
    ExperimentSummary sa = run_experiment(cfg, opt);
    opt.out_root = root_b.string();
    ExperimentSummary sb = run_experiment(cfg, opt);

    CHECK(sa.dir == (root_a / "tiny").string());
    REQUIRE(sa.points.size() == 2u);
    REQUIRE(sa.final_stats.size() == 2u);

    std::set<std::string> files;
    for (const auto& e : fs::directory_iterator(sa.dir)) files.insert(e.path().filename().string());
    std::set<std::string> want{"manifest.json",
                               "metrics_k0_t1_seed1.csv",
                               "metrics_k0_t1_seed2.csv",
                               "metrics_k1_t1_seed1.csv",
                               "metrics_k1_t1_seed2.csv",
                               "agg_k0_t1.csv",
                               "agg_k1_t1.csv",
                               "sweep_summary.csv",
                               "returns.svg"};
    CHECK(files == want);

    for (const auto& name : want)
        CHECK(slurp(fs::path(sa.dir) / name) == slurp(fs::path(sb.dir) / name));

    // aggregates agree with recomputing the quantiles from the per-seed files
    CsvTable s1 = read_csv((fs::path(sa.dir) / "metrics_k0_t1_seed1.csv").string());
    CsvTable s2 = read_csv((fs::path(sa.dir) / "metrics_k0_t1_seed2.csv").string());
    CsvTable agg = read_csv((fs::path(sa.dir) / "agg_k0_t1.csv").string());
    REQUIRE(agg.rows() == 2u);
    for (std::size_t r = 0; r < agg.rows(); ++r) {
        double med = quantile({s1.cols[1][r], s2.cols[1][r]}, 0.5);
        CHECK(agg.cols[2][r] == Catch::Approx(med).margin(1e-15));
    }

    // replotting regenerates the chart byte for byte
    std::string svg_before = slurp(fs::path(sa.dir) / "returns.svg");
    fs::remove(fs::path(sa.dir) / "returns.svg");
    plot_experiment(sa.dir);
    CHECK(slurp(fs::path(sa.dir) / "returns.svg") == svg_before);

    fs::remove_all(root_a);
    fs::remove_all(root_b);
}

TEST_CASE("an experiment can run from a saved model file", "[experiment]") {
    fs::path model = fs::temp_directory_path() / "lpi_exp_model.json";
    save_mdp(testenv::chain2_env(), model.string());

    nlohmann::json j;
    j["experiment"] = {{"name", "from_file"}};
    j["env"] = {{"kind", "file"}, {"path", model.string()}};
    j["lpi"] = {{"kappa", 1}, {"M", 1}, {"T", 40}, {"p_max", 2}, {"return_episodes", 4}};
    ExperimentConfig cfg = parse_experiment_config(j);

    fs::path root = fs::temp_directory_path() / "lpi_exp_file";
    fs::remove_all(root);
    RunnerOptions opt;
    opt.quiet = true;
    opt.out_root = root.string();
    ExperimentSummary s = run_experiment(cfg, opt);
    REQUIRE(s.points.size() == 1u);
    CHECK(s.points[0].tau == 1.0);  // picked up from the model file
    CHECK(fs::exists(fs::path(s.dir) / "metrics_k1_t1_seed1.csv"));

    fs::remove_all(root);
    fs::remove(model);
}
