#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "qmeasure/env.hpp"
#include "qmeasure/inventory.hpp"
#include "qmeasure/rng.hpp"
#include "qmeasure/schedule.hpp"

namespace qm {

struct CheckpointSchedule {
    enum class Kind { None, Geometric, Interval };
    Kind kind = Kind::Geometric;
    std::uint64_t first = 100;
    double factor = 2.0;
    std::uint64_t every = 1000;

    std::vector<std::uint64_t> points(std::uint64_t iterations) const;
};

struct EvalSettings {
    bool enabled = false;
    int episodes = 256;
    int horizon = 200;
    int probe_subsample = 0;  // 0 keeps the full probe set
    std::string reference_table;  // optional DP table path for RMSE
};

struct DpSettings {
    int cells_per_axis = 25;
    int demand_samples = 10000;
    double tol = 1e-8;
    int max_sweeps = 500;
};

struct DiagnosticsSettings {
    std::uint64_t steps = 100000;
    int bins = 50;
};

struct XiSettings {
    int samples = 4096;
    double alpha = 1.0;
    std::vector<double> sigmas{0.2, 0.1, 0.05};
    int probe_cells = 11;
};

// Full description of a run. Every stochastic component draws from a
// named stream derived from the master seed, so adding a consumer never
// perturbs existing streams.
struct RunConfig {
    int schema_version = 1;
    std::string env_type = "inventory";  // "inventory" or "discrete_test"
    InventoryParams inventory = InventoryParams::baseline();
    double sigma = 1.0;
    ActionMode kernel_mode = ActionMode::ContinuousBox;
    double gamma = 0.7;
    double alpha_a = 1.0;
    double alpha_b = 1.0;
    std::uint64_t iterations = 30000;
    CheckpointSchedule checkpoints;
    EvalSettings evaluation;
    DpSettings dp;
    DiagnosticsSettings diagnostics;
    XiSettings xi;
    std::uint64_t master_seed = 7;
    int metrics_thin = 1;

    void validate() const;
    Rng stream(std::string_view name) const { return derive_stream(master_seed, name); }
    std::uint64_t stream_seed(std::string_view name) const {
        return derive_stream_seed(master_seed, name);
    }
    std::unique_ptr<Env> make_env() const;
    KernelConfig make_kernel(const Env& env) const;
    StepSchedule alpha_schedule() const { return StepSchedule::alpha_rm(alpha_a, alpha_b); }

    // Bundled experiment presets: the 99-action instance at n = 30000 and
    // a 20-action desk-scale instance that runs in minutes.
    static RunConfig preset(const std::string& name);  // paper_baseline | paper_small
};

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

}  // namespace qm
