#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <map>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "qmeasure/benchmark.hpp"
#include "qmeasure/commands.hpp"
#include "qmeasure/config.hpp"

using namespace qm;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const char* name) {
    const fs::path p = fs::temp_directory_path() / name;
    fs::remove_all(p);
    return p;
}

}  // namespace

TEST_SUITE_BEGIN("commands");

TEST_CASE("train with zero iterations writes headers only") {
    RunConfig cfg = RunConfig::preset("paper_small");
    cfg.iterations = 0;
    cfg.evaluation.enabled = true;
    cfg.evaluation.episodes = 2;
    cfg.evaluation.horizon = 5;
    const auto out = fresh_dir("qm_train0");
    CHECK(cmd_train(cfg, out.string()) == 0);
    CHECK(slurp(out / "train_metrics.csv") == "iteration,reward,target_y,greedy_value\n");
    CHECK(slurp(out / "train_timing.csv") == "iteration,step_seconds\n");
    CHECK(slurp(out / "eval_metrics.csv") ==
          "iteration,mc_return_mean,mc_return_stderr,rmse,clip_rate,episodes,horizon\n");
    CHECK(fs::exists(out / "ckpt_final.bin"));
}

TEST_CASE("metric csv formatting is frozen") {
    RunConfig cfg;
    cfg.env_type = "discrete_test";
    cfg.kernel_mode = ActionMode::FiniteActions;
    cfg.iterations = 3;
    cfg.master_seed = 11;
    cfg.checkpoints.kind = CheckpointSchedule::Kind::None;
    const auto out = fresh_dir("qm_golden");
    REQUIRE(cmd_train(cfg, out.string()) == 0);
    // golden bytes: column order and number formatting are load-bearing
    CHECK(slurp(out / "train_metrics.csv") ==
          "iteration,reward,target_y,greedy_value\n"
          "1,-0.20000000000000001,-0.20000000000000001,0\n"
          "2,0.40000000000000002,0.33436931227232591,-0.093758125325248756\n"
          "3,0.10000000000000001,0.12752794471786136,0.039325635311230518\n");
}

TEST_CASE("train on the discrete test environment") {
    RunConfig cfg;
    cfg.env_type = "discrete_test";
    cfg.kernel_mode = ActionMode::FiniteActions;
    cfg.iterations = 50;
    cfg.checkpoints.kind = CheckpointSchedule::Kind::None;
    const auto out = fresh_dir("qm_train_dt");
    CHECK(cmd_train(cfg, out.string()) == 0);
    // header plus one row per iteration
    const std::string metrics = slurp(out / "train_metrics.csv");
    CHECK(std::count(metrics.begin(), metrics.end(), '\n') == 51);
}

TEST_CASE("dp-baseline writes the table and metadata") {
    RunConfig cfg = RunConfig::preset("paper_small");
    cfg.dp.cells_per_axis = 5;
    cfg.dp.demand_samples = 200;
    const auto out = fresh_dir("qm_dp");
    CHECK(cmd_dp_baseline(cfg, out.string()) == 0);
    std::ifstream in(out / "dp_table.bin", std::ios::binary);
    const GridQTable t = load_table(in);
    CHECK(t.cells_per_axis == 5);
    CHECK(t.num_actions == 20);
    CHECK(t.converged);
    CHECK(slurp(out / "dp_meta.json").find("\"sweeps\"") != std::string::npos);

    RunConfig bad = cfg;
    bad.env_type = "discrete_test";
    CHECK_THROWS_AS(cmd_dp_baseline(bad, (out / "x").string()), std::invalid_argument);
}

TEST_CASE("evaluate reads a checkpoint and emits one row") {
    RunConfig cfg = RunConfig::preset("paper_small");
    cfg.iterations = 40;
    cfg.checkpoints.kind = CheckpointSchedule::Kind::None;
    cfg.evaluation.episodes = 4;
    cfg.evaluation.horizon = 10;
    const auto train_out = fresh_dir("qm_eval_train");
    REQUIRE(cmd_train(cfg, train_out.string()) == 0);
    const auto out = fresh_dir("qm_eval_out");
    CHECK(cmd_evaluate(cfg, out.string(), (train_out / "ckpt_final.bin").string(), "") == 0);
    const std::string row = slurp(out / "evaluate.csv");
    CHECK(row.find("40,") != std::string::npos);  // checkpoint iteration
    CHECK(row.find("nan") != std::string::npos);  // no reference table -> rmse nan

    CHECK_THROWS(cmd_evaluate(cfg, out.string(), "missing.bin", ""));
}

TEST_CASE("evaluate with a reference table and probe subsampling") {
    RunConfig cfg = RunConfig::preset("paper_small");
    cfg.iterations = 30;
    cfg.checkpoints.kind = CheckpointSchedule::Kind::None;
    cfg.evaluation.episodes = 2;
    cfg.evaluation.horizon = 5;
    cfg.dp.cells_per_axis = 4;
    cfg.dp.demand_samples = 100;
    const auto train_out = fresh_dir("qm_eval2_train");
    REQUIRE(cmd_train(cfg, train_out.string()) == 0);
    const auto dp_out = fresh_dir("qm_eval2_dp");
    REQUIRE(cmd_dp_baseline(cfg, dp_out.string()) == 0);

    cfg.evaluation.probe_subsample = 7;
    const auto out = fresh_dir("qm_eval2_out");
    CHECK(cmd_evaluate(cfg, out.string(), (train_out / "ckpt_final.bin").string(),
                       (dp_out / "dp_table.bin").string()) == 0);
    const std::string row = slurp(out / "evaluate.csv");
    CHECK(row.find("nan") == std::string::npos);  // rmse computed
}

TEST_CASE("diagnostics rejects the discrete environment") {
    RunConfig cfg;
    cfg.env_type = "discrete_test";
    cfg.kernel_mode = ActionMode::FiniteActions;
    CHECK_THROWS_AS(cmd_diagnostics(cfg, fresh_dir("qm_diag").string()), std::invalid_argument);
}

TEST_CASE("diagnostics with a zero-step rollout writes empty histograms") {
    RunConfig cfg = RunConfig::preset("paper_small");
    cfg.diagnostics.steps = 0;
    cfg.diagnostics.bins = 4;
    const auto out = fresh_dir("qm_diag0");
    CHECK(cmd_diagnostics(cfg, out.string()) == 0);
    const std::string hist = slurp(out / "visitation_baseline.csv");
    for (char c : hist) CHECK((c == '0' || c == ',' || c == '\n'));
    const std::string summary = slurp(out / "diagnostics_summary.csv");
    CHECK(summary.find("baseline,0,0,0,0") != std::string::npos);
}

TEST_CASE("xi-sweep emits one row per sigma, order-independent values") {
    RunConfig cfg;
    cfg.env_type = "discrete_test";
    cfg.kernel_mode = ActionMode::FiniteActions;
    cfg.xi.samples = 300;
    cfg.xi.probe_cells = 5;
    const auto out1 = fresh_dir("qm_xi1");
    CHECK(cmd_xi_sweep(cfg, out1.string(), {0.5, 1.0}) == 0);
    const auto out2 = fresh_dir("qm_xi2");
    CHECK(cmd_xi_sweep(cfg, out2.string(), {1.0, 0.5}) == 0);

    auto parse_rows = [](const std::string& text) {
        std::map<double, double> by_sigma;
        std::istringstream ss(text);
        std::string line;
        std::getline(ss, line);  // header
        while (std::getline(ss, line)) {
            double s = 0, xi = 0, r = 0;
            REQUIRE(std::sscanf(line.c_str(), "%lf,%lf,%lf", &s, &xi, &r) == 3);
            by_sigma[s] = xi;
        }
        return by_sigma;
    };
    const auto a = parse_rows(slurp(out1 / "xi_sweep.csv"));
    const auto b = parse_rows(slurp(out2 / "xi_sweep.csv"));
    CHECK(a.size() == 2);
    CHECK(a == b);

    CHECK_THROWS_AS(cmd_xi_sweep(cfg, out1.string(), {-1.0}), std::invalid_argument);
    RunConfig empty = cfg;
    empty.xi.sigmas = {};
    CHECK_THROWS_AS(cmd_xi_sweep(empty, out1.string(), {}), std::invalid_argument);
}

TEST_SUITE_END();
