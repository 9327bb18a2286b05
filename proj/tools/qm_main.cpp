#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qmeasure/commands.hpp"

namespace {

struct CommonOpts {
    std::string config_path;
    std::string preset;
    std::string out_dir = "out";
    std::uint64_t seed = 0;
    bool seed_set = false;
};

void add_common(CLI::App* sub, CommonOpts& o) {
    sub->add_option("--config", o.config_path, "run configuration file (JSON)");
    sub->add_option("--preset", o.preset, "built-in preset: paper_baseline or paper_small");
    sub->add_option("--out", o.out_dir, "output directory");
    sub->add_option("--seed", o.seed, "master seed override")->each([&o](const std::string&) {
        o.seed_set = true;
    });
}

qm::RunConfig resolve(const CommonOpts& o) {
    if (o.config_path.empty() && o.preset.empty())
        throw std::invalid_argument("either --config or --preset is required");
    qm::RunConfig cfg =
        o.config_path.empty() ? qm::RunConfig::preset(o.preset) : qm::load_config(o.config_path);
    if (o.seed_set) cfg.master_seed = o.seed;
    cfg.validate();
    return cfg;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Q-measure learning: train, benchmark and diagnose"};
    app.require_subcommand(1);

    CommonOpts train_o, dp_o, eval_o, diag_o, xi_o;
    std::string checkpoint_path, table_path;
    std::vector<double> sigmas;

    CLI::App* train = app.add_subcommand("train", "run the online learner");
    add_common(train, train_o);
    CLI::App* dp = app.add_subcommand("dp-baseline", "value iteration on the quantized grid");
    add_common(dp, dp_o);
    CLI::App* ev = app.add_subcommand("evaluate", "evaluate a saved checkpoint");
    add_common(ev, eval_o);
    ev->add_option("--checkpoint", checkpoint_path, "learner checkpoint file")->required();
    ev->add_option("--table", table_path, "reference DP table for RMSE");
    CLI::App* diag = app.add_subcommand("diagnostics", "behavior-policy coverage histograms");
    add_common(diag, diag_o);
    CLI::App* xi = app.add_subcommand("xi-sweep", "smoothing-bias functional over bandwidths");
    add_common(xi, xi_o);
    xi->add_option("--sigma", sigmas, "bandwidths to sweep (repeatable)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) return qm::cmd_train(resolve(train_o), train_o.out_dir);
        if (dp->parsed()) return qm::cmd_dp_baseline(resolve(dp_o), dp_o.out_dir);
        if (ev->parsed())
            return qm::cmd_evaluate(resolve(eval_o), eval_o.out_dir, checkpoint_path, table_path);
        if (diag->parsed()) return qm::cmd_diagnostics(resolve(diag_o), diag_o.out_dir);
        if (xi->parsed()) return qm::cmd_xi_sweep(resolve(xi_o), xi_o.out_dir, sigmas);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
