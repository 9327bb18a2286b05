#include "qmeasure/config.hpp"

#include <fstream>
#include <type_traits>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "qmeasure/discrete_mdp.hpp"

namespace qm {

using nlohmann::json;

std::vector<std::uint64_t> CheckpointSchedule::points(std::uint64_t iterations) const {
    std::vector<std::uint64_t> out;
    if (kind == Kind::None) return out;
    if (kind == Kind::Interval) {
        for (std::uint64_t n = every; n <= iterations && every > 0; n += every) out.push_back(n);
        return out;
    }
    double n = static_cast<double>(first);
    while (n <= static_cast<double>(iterations)) {
        const std::uint64_t v = static_cast<std::uint64_t>(n);
        if (out.empty() || out.back() != v) out.push_back(v);
        n *= factor;
    }
    return out;
}

void RunConfig::validate() const {
    if (schema_version != 1) throw std::invalid_argument("config: unsupported schema_version");
    if (env_type != "inventory" && env_type != "discrete_test")
        throw std::invalid_argument("config: environment.type must be inventory or discrete_test");
    if (!(sigma > 0.0)) throw std::invalid_argument("config: kernel.sigma must be positive");
    if (!(gamma > 0.0 && gamma < 1.0)) throw std::invalid_argument("config: gamma must lie in (0,1)");
    if (!(alpha_a > 0.0) || !(alpha_b > 0.0))
        throw std::invalid_argument("config: alpha.a and alpha.b must be positive");
    if (alpha_a / (1.0 + alpha_b) > 1.0)
        throw std::invalid_argument(
            "config: alpha.a must not exceed 1 + alpha.b (stepsizes stay in (0, 1])");
    if (evaluation.episodes < 1 || evaluation.horizon < 1)
        throw std::invalid_argument("config: evaluation.episodes and evaluation.horizon must be positive");
    if (dp.cells_per_axis < 1 || dp.demand_samples < 1 || !(dp.tol > 0.0) || dp.max_sweeps < 1)
        throw std::invalid_argument("config: dp settings must be positive");
    if (diagnostics.bins < 1)
        throw std::invalid_argument("config: diagnostics.bins must be positive");
    if (xi.samples < 1 || !(xi.alpha > 0.0 && xi.alpha <= 1.0) || xi.probe_cells < 1)
        throw std::invalid_argument("config: xi settings invalid");
    for (double s : xi.sigmas)
        if (!(s > 0.0)) throw std::invalid_argument("config: xi.sigmas must be positive");
    if (metrics_thin < 1) throw std::invalid_argument("config: metrics_thin must be positive");
    if (checkpoints.kind == CheckpointSchedule::Kind::Geometric &&
        (!(checkpoints.factor > 1.0) || checkpoints.first < 1))
        throw std::invalid_argument("config: geometric checkpoints need first >= 1 and factor > 1");
    if (env_type == "inventory") inventory.validate();
}

std::unique_ptr<Env> RunConfig::make_env() const {
    if (env_type == "inventory") return std::make_unique<InventoryEnv>(inventory);
    return std::make_unique<DiscreteMdpEnv>(DiscreteTestMDP::default_instance());
}

KernelConfig RunConfig::make_kernel(const Env& env) const {
    if (kernel_mode == ActionMode::ContinuousBox) {
        if (env_type != "inventory")
            throw std::invalid_argument("config: continuous_box kernel requires the inventory environment");
        return static_cast<const InventoryEnv&>(env).make_kernel(sigma);
    }
    if (env_type == "inventory")
        return static_cast<const InventoryEnv&>(env).make_kernel_finite(sigma);
    return env.make_kernel(sigma);
}

RunConfig RunConfig::preset(const std::string& name) {
    RunConfig cfg;
    if (name == "paper_baseline") {
        cfg.inventory = InventoryParams::baseline();
        cfg.iterations = 30000;
        cfg.evaluation.episodes = 256;
        cfg.evaluation.horizon = 200;
        cfg.dp.cells_per_axis = 25;
        return cfg;
    }
    if (name == "paper_small") {
        cfg.inventory = InventoryParams::small_scale();
        cfg.iterations = 5000;
        cfg.evaluation.episodes = 64;
        cfg.evaluation.horizon = 200;
        cfg.dp.cells_per_axis = 15;
        cfg.alpha_b = 25.0;  // damped start; still alpha_n ~ 1/n
        return cfg;
    }
    throw std::invalid_argument("config: unknown preset '" + name + "'");
}

namespace {

void require_keys(const json& obj, const std::string& where, const std::set<std::string>& known) {
    for (const auto& [key, _] : obj.items()) {
        if (!known.count(key))
            throw std::invalid_argument("config: unknown key '" +
                                        (where.empty() ? key : where + "." + key) + "'");
    }
}

template <typename T>
void read_into(const json& obj, const std::string& where, const char* key, T& out) {
    if (!obj.contains(key)) return;
    if constexpr (std::is_unsigned_v<T>) {
        if (obj.at(key).is_number_integer() && !obj.at(key).is_number_unsigned())
            throw std::invalid_argument("config: '" + where + key + "' must be nonnegative");
    }
    try {
        out = obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw std::invalid_argument("config: bad value for '" + where + key + "'");
    }
}

std::array<double, 2> read_vec2(const json& j, const std::string& where) {
    if (!j.is_array() || j.size() != 2)
        throw std::invalid_argument("config: '" + where + "' must be a 2-vector");
    return {j[0].get<double>(), j[1].get<double>()};
}

}  // namespace

RunConfig parse_config(const std::string& json_text) {
    json root;
    try {
        root = json::parse(json_text);
    } catch (const json::exception& e) {
        throw std::invalid_argument(std::string("config: parse error: ") + e.what());
    }
    RunConfig cfg;
    require_keys(root, "",
                 {"schema_version", "environment", "kernel", "gamma", "alpha", "iterations",
                  "checkpoints", "evaluation", "dp", "diagnostics", "xi", "seed",
                  "metrics_thin"});
    read_into(root, "", "schema_version", cfg.schema_version);
    read_into(root, "", "gamma", cfg.gamma);
    read_into(root, "", "iterations", cfg.iterations);
    read_into(root, "", "seed", cfg.master_seed);
    read_into(root, "", "metrics_thin", cfg.metrics_thin);

    if (root.contains("environment")) {
        const json& e = root["environment"];
        std::string type = "inventory";
        read_into(e, "environment.", "type", type);
        cfg.env_type = type;
        if (type == "inventory") {
            require_keys(e, "environment",
                         {"type", "i_max", "a_max", "order_cost", "holding_cost", "lostsale_cost",
                          "fixed_cost", "demand_mean", "demand_cov", "c_max"});
            InventoryParams& p = cfg.inventory;
            read_into(e, "environment.", "i_max", p.i_max);
            if (e.contains("a_max")) {
                const auto v = read_vec2(e["a_max"], "environment.a_max");
                p.a_max = {static_cast<int>(v[0]), static_cast<int>(v[1])};
            }
            if (e.contains("order_cost")) p.order_cost = read_vec2(e["order_cost"], "environment.order_cost");
            if (e.contains("holding_cost"))
                p.holding_cost = read_vec2(e["holding_cost"], "environment.holding_cost");
            if (e.contains("lostsale_cost"))
                p.lostsale_cost = read_vec2(e["lostsale_cost"], "environment.lostsale_cost");
            read_into(e, "environment.", "fixed_cost", p.fixed_cost);
            if (e.contains("demand_mean"))
                p.demand_mean = read_vec2(e["demand_mean"], "environment.demand_mean");
            if (e.contains("demand_cov")) {
                const json& c = e["demand_cov"];
                if (!c.is_array() || c.size() != 2)
                    throw std::invalid_argument("config: 'environment.demand_cov' must be 2x2");
                p.demand_cov[0] = read_vec2(c[0], "environment.demand_cov[0]");
                p.demand_cov[1] = read_vec2(c[1], "environment.demand_cov[1]");
            }
            read_into(e, "environment.", "c_max", p.c_max);
        } else {
            require_keys(e, "environment", {"type"});
        }
    }
    if (root.contains("kernel")) {
        const json& k = root["kernel"];
        require_keys(k, "kernel", {"sigma", "mode"});
        read_into(k, "kernel.", "sigma", cfg.sigma);
        std::string mode = "continuous_box";
        read_into(k, "kernel.", "mode", mode);
        if (mode == "continuous_box")
            cfg.kernel_mode = ActionMode::ContinuousBox;
        else if (mode == "finite_actions")
            cfg.kernel_mode = ActionMode::FiniteActions;
        else
            throw std::invalid_argument("config: kernel.mode must be continuous_box or finite_actions");
    }
    if (root.contains("alpha")) {
        const json& a = root["alpha"];
        require_keys(a, "alpha", {"a", "b"});
        read_into(a, "alpha.", "a", cfg.alpha_a);
        read_into(a, "alpha.", "b", cfg.alpha_b);
    }
    if (root.contains("checkpoints")) {
        const json& c = root["checkpoints"];
        require_keys(c, "checkpoints", {"kind", "first", "factor", "every"});
        std::string kind = "geometric";
        read_into(c, "checkpoints.", "kind", kind);
        if (kind == "none")
            cfg.checkpoints.kind = CheckpointSchedule::Kind::None;
        else if (kind == "geometric")
            cfg.checkpoints.kind = CheckpointSchedule::Kind::Geometric;
        else if (kind == "interval")
            cfg.checkpoints.kind = CheckpointSchedule::Kind::Interval;
        else
            throw std::invalid_argument("config: checkpoints.kind must be none, geometric or interval");
        read_into(c, "checkpoints.", "first", cfg.checkpoints.first);
        read_into(c, "checkpoints.", "factor", cfg.checkpoints.factor);
        read_into(c, "checkpoints.", "every", cfg.checkpoints.every);
    }
    if (root.contains("evaluation")) {
        const json& v = root["evaluation"];
        require_keys(v, "evaluation",
                     {"enabled", "episodes", "horizon", "probe_subsample", "reference_table"});
        read_into(v, "evaluation.", "enabled", cfg.evaluation.enabled);
        read_into(v, "evaluation.", "episodes", cfg.evaluation.episodes);
        read_into(v, "evaluation.", "horizon", cfg.evaluation.horizon);
        read_into(v, "evaluation.", "probe_subsample", cfg.evaluation.probe_subsample);
        read_into(v, "evaluation.", "reference_table", cfg.evaluation.reference_table);
    }
    if (root.contains("dp")) {
        const json& d = root["dp"];
        require_keys(d, "dp", {"cells_per_axis", "demand_samples", "tol", "max_sweeps"});
        read_into(d, "dp.", "cells_per_axis", cfg.dp.cells_per_axis);
        read_into(d, "dp.", "demand_samples", cfg.dp.demand_samples);
        read_into(d, "dp.", "tol", cfg.dp.tol);
        read_into(d, "dp.", "max_sweeps", cfg.dp.max_sweeps);
    }
    if (root.contains("diagnostics")) {
        const json& dg = root["diagnostics"];
        require_keys(dg, "diagnostics", {"steps", "bins"});
        read_into(dg, "diagnostics.", "steps", cfg.diagnostics.steps);
        read_into(dg, "diagnostics.", "bins", cfg.diagnostics.bins);
    }
    if (root.contains("xi")) {
        const json& x = root["xi"];
        require_keys(x, "xi", {"samples", "alpha", "sigmas", "probe_cells"});
        read_into(x, "xi.", "samples", cfg.xi.samples);
        read_into(x, "xi.", "alpha", cfg.xi.alpha);
        if (x.contains("sigmas")) cfg.xi.sigmas = x["sigmas"].get<std::vector<double>>();
        read_into(x, "xi.", "probe_cells", cfg.xi.probe_cells);
    }
    cfg.validate();
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::string serialize_config(const RunConfig& cfg) {
    json root;
    root["schema_version"] = cfg.schema_version;
    json e;
    e["type"] = cfg.env_type;
    if (cfg.env_type == "inventory") {
        const InventoryParams& p = cfg.inventory;
        e["i_max"] = p.i_max;
        e["a_max"] = {p.a_max[0], p.a_max[1]};
        e["order_cost"] = {p.order_cost[0], p.order_cost[1]};
        e["holding_cost"] = {p.holding_cost[0], p.holding_cost[1]};
        e["lostsale_cost"] = {p.lostsale_cost[0], p.lostsale_cost[1]};
        e["fixed_cost"] = p.fixed_cost;
        e["demand_mean"] = {p.demand_mean[0], p.demand_mean[1]};
        e["demand_cov"] = {{p.demand_cov[0][0], p.demand_cov[0][1]},
                           {p.demand_cov[1][0], p.demand_cov[1][1]}};
        e["c_max"] = p.c_max;
    }
    root["environment"] = e;
    root["kernel"] = {
        {"sigma", cfg.sigma},
        {"mode", cfg.kernel_mode == ActionMode::ContinuousBox ? "continuous_box" : "finite_actions"}};
    root["gamma"] = cfg.gamma;
    root["alpha"] = {{"a", cfg.alpha_a}, {"b", cfg.alpha_b}};
    root["iterations"] = cfg.iterations;
    const char* kind = cfg.checkpoints.kind == CheckpointSchedule::Kind::None ? "none"
                       : cfg.checkpoints.kind == CheckpointSchedule::Kind::Geometric ? "geometric"
                                                                                     : "interval";
    root["checkpoints"] = {{"kind", kind},
                           {"first", cfg.checkpoints.first},
                           {"factor", cfg.checkpoints.factor},
                           {"every", cfg.checkpoints.every}};
    root["evaluation"] = {{"enabled", cfg.evaluation.enabled},
                          {"episodes", cfg.evaluation.episodes},
                          {"horizon", cfg.evaluation.horizon},
                          {"probe_subsample", cfg.evaluation.probe_subsample},
                          {"reference_table", cfg.evaluation.reference_table}};
    root["dp"] = {{"cells_per_axis", cfg.dp.cells_per_axis},
                  {"demand_samples", cfg.dp.demand_samples},
                  {"tol", cfg.dp.tol},
                  {"max_sweeps", cfg.dp.max_sweeps}};
    root["diagnostics"] = {{"steps", cfg.diagnostics.steps}, {"bins", cfg.diagnostics.bins}};
    root["xi"] = {{"samples", cfg.xi.samples},
                  {"alpha", cfg.xi.alpha},
                  {"sigmas", cfg.xi.sigmas},
                  {"probe_cells", cfg.xi.probe_cells}};
    root["seed"] = cfg.master_seed;
    root["metrics_thin"] = cfg.metrics_thin;
    return root.dump(2) + "\n";
}

}  // namespace qm
