#include <doctest.h>

#include <stdexcept>
#include <string>

#include "qmeasure/config.hpp"
#include "qmeasure/csv.hpp"

using namespace qm;

TEST_SUITE_BEGIN("config");

TEST_CASE("presets carry the experiment constants") {
    const auto base = RunConfig::preset("paper_baseline");
    CHECK(base.gamma == 0.7);
    CHECK(base.sigma == 1.0);
    CHECK(base.kernel_mode == ActionMode::ContinuousBox);
    CHECK(base.inventory.i_max == 15.0);
    CHECK(base.inventory.a_max[0] == 10);
    CHECK(base.inventory.a_max[1] == 8);
    CHECK(base.inventory.order_cost[0] == 0.3);
    CHECK(base.inventory.order_cost[1] == 0.35);
    CHECK(base.inventory.holding_cost[0] == 0.05);
    CHECK(base.inventory.holding_cost[1] == 0.04);
    CHECK(base.inventory.lostsale_cost[0] == 0.8);
    CHECK(base.inventory.lostsale_cost[1] == 0.9);
    CHECK(base.inventory.fixed_cost == 0.2);
    CHECK(base.inventory.demand_mean[0] == 5.0);
    CHECK(base.inventory.demand_mean[1] == 4.0);
    CHECK(base.inventory.demand_cov[0][0] == 3.0);
    CHECK(base.inventory.demand_cov[0][1] == -0.21);
    CHECK(base.iterations == 30000);
    CHECK(base.evaluation.episodes == 256);
    CHECK(base.evaluation.horizon == 200);
    CHECK(base.dp.cells_per_axis == 25);
    // 25 cells per axis and 99 actions: 625 * 99 table entries
    CHECK(625 * (base.inventory.a_max[0] + 1) * (base.inventory.a_max[1] + 1) == 61875);

    const auto small = RunConfig::preset("paper_small");
    CHECK(small.inventory.a_max[0] == 4);
    CHECK(small.inventory.a_max[1] == 3);
    CHECK(small.iterations == 5000);
    CHECK(small.dp.cells_per_axis == 15);
    CHECK(small.evaluation.episodes == 64);

    CHECK_THROWS_AS(RunConfig::preset("nope"), std::invalid_argument);
}

TEST_CASE("serialize-parse round trip preserves every field") {
    RunConfig cfg = RunConfig::preset("paper_small");
    cfg.master_seed = 424242;
    cfg.sigma = 0.8;
    cfg.alpha_a = 2.0;
    cfg.alpha_b = 3.0;
    cfg.metrics_thin = 10;
    cfg.checkpoints.kind = CheckpointSchedule::Kind::Interval;
    cfg.checkpoints.every = 500;
    cfg.evaluation.enabled = true;
    cfg.evaluation.probe_subsample = 99;
    cfg.evaluation.reference_table = "dp_table.bin";
    cfg.xi.sigmas = {0.4, 0.3};
    cfg.inventory.c_max = 9.75;

    const std::string text = serialize_config(cfg);
    const RunConfig back = parse_config(text);
    CHECK(serialize_config(back) == text);
    CHECK(back.master_seed == cfg.master_seed);
    CHECK(back.sigma == cfg.sigma);
    CHECK(back.alpha_a == cfg.alpha_a);
    CHECK(back.alpha_b == cfg.alpha_b);
    CHECK(back.metrics_thin == cfg.metrics_thin);
    CHECK(back.checkpoints.kind == cfg.checkpoints.kind);
    CHECK(back.checkpoints.every == cfg.checkpoints.every);
    CHECK(back.evaluation.enabled == cfg.evaluation.enabled);
    CHECK(back.evaluation.probe_subsample == cfg.evaluation.probe_subsample);
    CHECK(back.evaluation.reference_table == cfg.evaluation.reference_table);
    CHECK(back.xi.sigmas == cfg.xi.sigmas);
    CHECK(back.inventory.c_max == cfg.inventory.c_max);
}

TEST_CASE("unknown keys are rejected with the offending name") {
    const char* bad_top = R"({"schema_version": 1, "gama": 0.7})";
    CHECK_THROWS_WITH_AS(parse_config(bad_top), "config: unknown key 'gama'",
                         std::invalid_argument);

    const char* bad_nested =
        R"({"schema_version": 1, "environment": {"type": "inventory", "imax": 10}})";
    CHECK_THROWS_WITH_AS(parse_config(bad_nested), "config: unknown key 'environment.imax'",
                         std::invalid_argument);

    const char* bad_kernel = R"({"schema_version": 1, "kernel": {"sigma": 1.0, "bandwith": 2}})";
    CHECK_THROWS_WITH_AS(parse_config(bad_kernel), "config: unknown key 'kernel.bandwith'",
                         std::invalid_argument);
}

TEST_CASE("invalid values are named") {
    CHECK_THROWS_AS(parse_config(R"({"gamma": 1.5})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"kernel": {"sigma": -1.0}})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"kernel": {"mode": "triangle"}})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"environment": {"type": "pendulum"}})"),
                    std::invalid_argument);
    CHECK_THROWS_AS(parse_config("not json"), std::invalid_argument);
}

TEST_CASE("discrete-test environment config") {
    const RunConfig cfg = parse_config(
        R"({"environment": {"type": "discrete_test"}, "kernel": {"mode": "finite_actions"}})");
    CHECK(cfg.env_type == "discrete_test");
    const auto env = cfg.make_env();
    CHECK(env->action_set().size() == 2);
    const auto k = cfg.make_kernel(*env);
    CHECK(k.mode == ActionMode::FiniteActions);
    // continuous kernel over index actions is rejected
    RunConfig bad = cfg;
    bad.kernel_mode = ActionMode::ContinuousBox;
    CHECK_THROWS_AS(bad.make_kernel(*env), std::invalid_argument);
}

TEST_CASE("named seed streams are stable and independent") {
    const RunConfig cfg = RunConfig::preset("paper_small");
    const auto s1 = cfg.stream_seed("trajectory");
    const auto s2 = cfg.stream_seed("eval");
    const auto s3 = cfg.stream_seed("dp-demand");
    CHECK(s1 != s2);
    CHECK(s2 != s3);
    CHECK(s1 == cfg.stream_seed("trajectory"));

    RunConfig other = cfg;
    other.master_seed += 1;
    CHECK(other.stream_seed("trajectory") != s1);

    // derivation is by name, so adding consumers cannot shift these
    CHECK(derive_stream_seed(7, "trajectory") == cfg.stream_seed("trajectory"));
}

TEST_CASE("checkpoint schedules") {
    CheckpointSchedule geo;
    geo.kind = CheckpointSchedule::Kind::Geometric;
    geo.first = 100;
    geo.factor = 2.0;
    CHECK(geo.points(1000) == std::vector<std::uint64_t>{100, 200, 400, 800});

    CheckpointSchedule none;
    none.kind = CheckpointSchedule::Kind::None;
    CHECK(none.points(1000).empty());

    CheckpointSchedule iv;
    iv.kind = CheckpointSchedule::Kind::Interval;
    iv.every = 300;
    CHECK(iv.points(1000) == std::vector<std::uint64_t>{300, 600, 900});
}

TEST_CASE("schedule and sign validation") {
    RunConfig cfg = RunConfig::preset("paper_small");
    cfg.checkpoints.kind = CheckpointSchedule::Kind::Geometric;
    cfg.checkpoints.factor = 1.0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);
    cfg.checkpoints.factor = 2.0;
    cfg.checkpoints.first = 0;
    CHECK_THROWS_AS(cfg.validate(), std::invalid_argument);

    CHECK_THROWS_AS(parse_config(R"({"iterations": -5})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"seed": -1})"), std::invalid_argument);
    CHECK_THROWS_AS(parse_config(R"({"checkpoints": {"kind": "geometric", "factor": 0.5}})"),
                    std::invalid_argument);
    // alpha_1 = a/(1+b) must stay a valid stepsize
    CHECK_THROWS_AS(parse_config(R"({"alpha": {"a": 5.0, "b": 1.0}})"), std::invalid_argument);
    CHECK_NOTHROW(parse_config(R"({"alpha": {"a": 2.0, "b": 1.0}})"));
}

TEST_CASE("csv formatting is stable") {
    CHECK(csv_double(0.1) == "0.10000000000000001");
    CHECK(csv_double(1.0) == "1");
    CHECK(csv_double(-2.5e-9) == "-2.5000000000000001e-09");
    CHECK(csv_u64(18446744073709551615ull) == "18446744073709551615");
}

TEST_SUITE_END();
