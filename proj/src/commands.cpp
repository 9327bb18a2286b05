#include "qmeasure/commands.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <limits>

#include <json.hpp>

#include "qmeasure/benchmark.hpp"
#include "qmeasure/csv.hpp"
#include "qmeasure/discrete_mdp.hpp"
#include "qmeasure/evaluation.hpp"
#include "qmeasure/learner.hpp"

namespace qm {

namespace fs = std::filesystem;

namespace {

std::ofstream open_out(const fs::path& p) {
    std::ofstream out(p, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file '" + p.string() + "'");
    return out;
}

StateAction initial_pair(const Env& env, const KernelConfig& kcfg, Rng& traj) {
    StateAction z0;
    z0.state = env.initial_state();
    const Action a0 = env.sample_behavior_action(traj);
    if (kcfg.mode == ActionMode::ContinuousBox)
        z0.action = a0.coords;
    else
        z0.action_index = a0.index;
    return z0;
}

void save_checkpoint(const fs::path& p, const LearnerState& ls) {
    auto out = open_out(p);
    save_measure(ls.mu, ls.iteration, out);
    save_measure(ls.nu, ls.iteration, out);
}

std::pair<WeightedMeasure, WeightedMeasure> load_checkpoint(const std::string& path,
                                                            std::uint64_t& iteration) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open checkpoint '" + path + "'");
    WeightedMeasure mu = load_measure(in, iteration);
    std::uint64_t it2 = 0;
    WeightedMeasure nu = load_measure(in, it2);
    return {std::move(mu), std::move(nu)};
}

std::vector<ProbePoint> probe_set(const RunConfig& cfg, const GridQTable& table,
                                  const std::vector<Action>& actions) {
    std::vector<ProbePoint> probes = default_probe_points(table, actions);
    const int keep = cfg.evaluation.probe_subsample;
    if (keep > 0 && keep < static_cast<int>(probes.size())) {
        Rng rng = cfg.stream("probe-subsample");
        for (int i = 0; i < keep; ++i) {
            const int j = i + rng.uniform_int(static_cast<int>(probes.size()) - i);
            std::swap(probes[i], probes[j]);
        }
        probes.resize(keep);
    }
    return probes;
}

std::string eval_row(const EvalReport& r) {
    return csv_u64(r.iteration) + "," + csv_double(r.mc_return_mean) + "," +
           csv_double(r.mc_return_stderr) + "," + csv_double(r.rmse_vs_reference) + "," +
           csv_double(r.clip_rate) + "," + std::to_string(r.episodes) + "," +
           std::to_string(r.horizon) + "\n";
}

}  // namespace

int cmd_train(const RunConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    const auto env = cfg.make_env();
    const KernelConfig kcfg = cfg.make_kernel(*env);
    Rng traj = cfg.stream("trajectory");

    LearnerState ls = LearnerState::init(kcfg, cfg.gamma, cfg.alpha_schedule(),
                                         initial_pair(*env, kcfg, traj));
    ls.argmax_rng = cfg.stream("continuous-argmax");

    auto metrics = open_out(fs::path(out_dir) / "train_metrics.csv");
    metrics << "iteration,reward,target_y,greedy_value\n";
    auto timing = open_out(fs::path(out_dir) / "train_timing.csv");
    timing << "iteration,step_seconds\n";

    std::ofstream eval_csv;
    GridQTable reference;
    std::vector<ProbePoint> probes;
    const bool want_eval = cfg.evaluation.enabled;
    const bool want_rmse = want_eval && !cfg.evaluation.reference_table.empty();
    if (want_eval) {
        eval_csv = open_out(fs::path(out_dir) / "eval_metrics.csv");
        eval_csv << "iteration,mc_return_mean,mc_return_stderr,rmse,clip_rate,episodes,horizon\n";
        if (want_rmse) {
            std::ifstream in(cfg.evaluation.reference_table, std::ios::binary);
            if (!in)
                throw std::runtime_error("cannot open evaluation.reference_table '" +
                                         cfg.evaluation.reference_table + "'");
            reference = load_table(in);
            probes = probe_set(cfg, reference, env->action_set());
        }
    }

    const auto checkpoints = cfg.checkpoints.points(cfg.iterations);
    std::size_t next_ckpt = 0;

    std::vector<double> state = env->initial_state();
    Action action;
    {
        // matches the action drawn for Z_0
        const double* lp = ls.last_point.data();
        if (kcfg.mode == ActionMode::ContinuousBox) {
            action.coords.assign(lp + kcfg.state_dim, lp + kcfg.point_dim());
            for (const Action& a : env->action_set())
                if (a.coords == action.coords) action.index = a.index;
        } else {
            action.index = static_cast<int>(lp[kcfg.state_dim]);
        }
    }

    for (std::uint64_t n = 0; n < cfg.iterations; ++n) {
        Transition tr = env->step(state, action, traj);
        const TDRecord rec = train_step(ls, tr, env->action_set());
        if (rec.iteration % static_cast<std::uint64_t>(cfg.metrics_thin) == 0) {
            metrics << csv_u64(rec.iteration) << ',' << csv_double(rec.reward) << ','
                    << csv_double(rec.target_y) << ',' << csv_double(rec.greedy_value) << '\n';
            timing << csv_u64(rec.iteration) << ',' << csv_double(rec.step_seconds) << '\n';
        }
        state = tr.next_state;
        action = tr.next_action;

        if (next_ckpt < checkpoints.size() && ls.iteration == checkpoints[next_ckpt]) {
            char name[32];
            std::snprintf(name, sizeof name, "ckpt_%08llu.bin",
                          static_cast<unsigned long long>(ls.iteration));
            save_checkpoint(fs::path(out_dir) / name, ls);
            if (want_eval) {
                const Snapshot snap = Snapshot::of(ls);
                const McResult mc =
                    mc_return(*env, snap.greedy_policy(env->action_set()), cfg.gamma,
                              cfg.evaluation.episodes, cfg.evaluation.horizon,
                              cfg.stream_seed("eval") ^ (ls.iteration * 0x9e3779b97f4a7c15ull));
                EvalReport r;
                r.iteration = ls.iteration;
                r.mc_return_mean = mc.mean;
                r.mc_return_stderr = mc.std_err;
                r.rmse_vs_reference =
                    want_rmse ? rmse_on_grid(snap, reference, probes)
                              : std::numeric_limits<double>::quiet_NaN();
                r.clip_rate = mc.clip_rate;
                r.episodes = cfg.evaluation.episodes;
                r.horizon = cfg.evaluation.horizon;
                eval_csv << eval_row(r);
            }
            ++next_ckpt;
        }
    }
    save_checkpoint(fs::path(out_dir) / "ckpt_final.bin", ls);
    auto cfg_out = open_out(fs::path(out_dir) / "run_config.json");
    cfg_out << serialize_config(cfg);
    return 0;
}

int cmd_dp_baseline(const RunConfig& cfg, const std::string& out_dir) {
    if (cfg.env_type != "inventory")
        throw std::invalid_argument("dp-baseline requires environment.type = inventory");
    fs::create_directories(out_dir);
    Rng rng = cfg.stream("dp-demand");
    const GridQTable table =
        dp_value_iteration(cfg.inventory, cfg.dp.cells_per_axis, cfg.dp.demand_samples,
                           cfg.gamma, cfg.dp.tol, cfg.dp.max_sweeps, rng);
    if (!table.converged)
        std::cerr << "warning: value iteration stopped at residual " << table.residual
                  << " after " << table.sweeps << " sweeps\n";
    auto out = open_out(fs::path(out_dir) / "dp_table.bin");
    save_table(table, out);

    nlohmann::json meta;
    meta["residual"] = table.residual;
    meta["sweeps"] = table.sweeps;
    meta["converged"] = table.converged;
    meta["demand_samples"] = cfg.dp.demand_samples;
    meta["cells_per_axis"] = cfg.dp.cells_per_axis;
    meta["seed"] = cfg.master_seed;
    auto mo = open_out(fs::path(out_dir) / "dp_meta.json");
    mo << meta.dump(2) << "\n";
    return 0;
}

int cmd_evaluate(const RunConfig& cfg, const std::string& out_dir,
                 const std::string& checkpoint_path, const std::string& table_path) {
    fs::create_directories(out_dir);
    const auto env = cfg.make_env();
    std::uint64_t iteration = 0;
    auto [mu, nu] = load_checkpoint(checkpoint_path, iteration);
    Snapshot snap{cfg.make_kernel(*env), cfg.gamma, std::move(mu), std::move(nu), iteration};

    EvalReport r;
    r.iteration = iteration;
    r.episodes = cfg.evaluation.episodes;
    r.horizon = cfg.evaluation.horizon;
    const McResult mc = mc_return(*env, snap.greedy_policy(env->action_set()), cfg.gamma,
                                  cfg.evaluation.episodes, cfg.evaluation.horizon,
                                  cfg.stream_seed("eval") ^ (iteration * 0x9e3779b97f4a7c15ull));
    r.mc_return_mean = mc.mean;
    r.mc_return_stderr = mc.std_err;
    r.clip_rate = mc.clip_rate;
    r.rmse_vs_reference = std::numeric_limits<double>::quiet_NaN();
    if (!table_path.empty()) {
        std::ifstream in(table_path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open table '" + table_path + "'");
        const GridQTable reference = load_table(in);
        r.rmse_vs_reference =
            rmse_on_grid(snap, reference, probe_set(cfg, reference, env->action_set()));
    }
    auto out = open_out(fs::path(out_dir) / "evaluate.csv");
    out << "iteration,mc_return_mean,mc_return_stderr,rmse,clip_rate,episodes,horizon\n"
        << eval_row(r);
    std::cout << eval_row(r);
    return 0;
}

namespace {

struct RolloutStats {
    std::vector<double> states_flat;
    double clip_rate = 0.0;
};

RolloutStats behavior_rollout(const Env& env, std::uint64_t steps, Rng& rng) {
    RolloutStats st;
    st.states_flat.reserve(2 * steps);
    std::vector<double> state = env.initial_state();
    Action a = env.sample_behavior_action(rng);
    std::uint64_t clipped = 0;
    for (std::uint64_t t = 0; t < steps; ++t) {
        Transition tr = env.step(state, a, rng);
        st.states_flat.insert(st.states_flat.end(), tr.next_state.begin(), tr.next_state.end());
        if (tr.reward_clipped) ++clipped;
        state = std::move(tr.next_state);
        a = std::move(tr.next_action);
    }
    st.clip_rate = steps == 0 ? 0.0 : static_cast<double>(clipped) / static_cast<double>(steps);
    return st;
}

void write_histogram_csv(const fs::path& p, const std::vector<std::int64_t>& counts, int bins) {
    auto out = open_out(p);
    for (int r = 0; r < bins; ++r) {
        for (int c = 0; c < bins; ++c) {
            out << counts[static_cast<std::size_t>(r) * bins + c];
            out << (c + 1 == bins ? '\n' : ',');
        }
    }
}

}  // namespace

int cmd_diagnostics(const RunConfig& cfg, const std::string& out_dir) {
    if (cfg.env_type != "inventory")
        throw std::invalid_argument("diagnostics requires environment.type = inventory");
    fs::create_directories(out_dir);
    const std::uint64_t kSteps = cfg.diagnostics.steps;
    const int kBins = cfg.diagnostics.bins;

    auto summary = open_out(fs::path(out_dir) / "diagnostics_summary.csv");
    summary << "scenario,steps,coverage,top_right_share,clip_rate\n";

    const InventoryParams scenarios[2] = {cfg.inventory, shifted_demand_params(cfg.inventory)};
    const char* names[2] = {"baseline", "shifted_demand"};
    for (int s = 0; s < 2; ++s) {
        InventoryEnv env(scenarios[s]);
        Rng rng = cfg.stream(s == 0 ? "diagnostics-baseline" : "diagnostics-shifted");
        const RolloutStats st = behavior_rollout(env, kSteps, rng);
        const auto counts = visitation_histogram(st.states_flat, env.state_box(), kBins);

        std::int64_t nonempty = 0, top_right = 0, total = 0;
        for (int r = 0; r < kBins; ++r)
            for (int c = 0; c < kBins; ++c) {
                const std::int64_t n = counts[static_cast<std::size_t>(r) * kBins + c];
                total += n;
                if (n > 0) ++nonempty;
                if (r >= kBins / 2 && c >= kBins / 2) top_right += n;
            }
        const double coverage = static_cast<double>(nonempty) / (kBins * kBins);
        const double tr_share = total == 0 ? 0.0 : static_cast<double>(top_right) / total;
        summary << names[s] << ',' << kSteps << ',' << csv_double(coverage) << ','
                << csv_double(tr_share) << ',' << csv_double(st.clip_rate) << '\n';
        write_histogram_csv(fs::path(out_dir) / (std::string("visitation_") + names[s] + ".csv"),
                            counts, kBins);
    }
    return 0;
}

int cmd_xi_sweep(const RunConfig& cfg, const std::string& out_dir,
                 const std::vector<double>& sigma_override) {
    fs::create_directories(out_dir);
    const std::vector<double>& sigmas = sigma_override.empty() ? cfg.xi.sigmas : sigma_override;
    if (sigmas.empty()) throw std::invalid_argument("xi-sweep: empty sigma list");
    for (double s : sigmas)
        if (!(s > 0.0)) throw std::invalid_argument("xi-sweep: sigmas must be positive");

    const auto env = cfg.make_env();
    const KernelConfig base = cfg.make_kernel(*env);

    // Frozen empirical sample of the behavior chain.
    Rng rng = cfg.stream("xi-sample");
    std::vector<double> sample;
    sample.reserve(static_cast<std::size_t>(cfg.xi.samples) * base.point_dim());
    std::vector<double> state = env->initial_state();
    Action a = env->sample_behavior_action(rng);
    std::vector<double> pt(base.point_dim());
    for (int t = 0; t < cfg.xi.samples; ++t) {
        for (int i = 0; i < base.state_dim; ++i) pt[i] = state[i];
        if (base.mode == ActionMode::ContinuousBox)
            for (int i = 0; i < base.action_dim; ++i) pt[base.state_dim + i] = a.coords[i];
        else
            pt[base.state_dim] = static_cast<double>(a.index);
        sample.insert(sample.end(), pt.begin(), pt.end());
        Transition tr = env->step(state, a, rng);
        state = std::move(tr.next_state);
        a = std::move(tr.next_action);
    }

    // Probe lattice over the state box crossed with every action.
    const Box sbox = env->state_box();
    std::vector<double> probes;
    const int pc = cfg.xi.probe_cells;
    std::vector<std::vector<double>> lattice;
    if (sbox.dim() == 2) {
        for (int i = 0; i < pc; ++i)
            for (int j = 0; j < pc; ++j)
                lattice.push_back(
                    {sbox.lo[0] + (i + 0.5) * (sbox.hi[0] - sbox.lo[0]) / pc,
                     sbox.lo[1] + (j + 0.5) * (sbox.hi[1] - sbox.lo[1]) / pc});
    } else {
        for (int i = 0; i < pc; ++i)
            lattice.push_back({sbox.lo[0] + (i + 0.5) * (sbox.hi[0] - sbox.lo[0]) / pc});
    }
    for (const auto& st : lattice) {
        for (const Action& act : env->action_set()) {
            for (int i = 0; i < base.state_dim; ++i) pt[i] = st[i];
            if (base.mode == ActionMode::ContinuousBox)
                for (int i = 0; i < base.action_dim; ++i) pt[base.state_dim + i] = act.coords[i];
            else
                pt[base.state_dim] = static_cast<double>(act.index);
            probes.insert(probes.end(), pt.begin(), pt.end());
        }
    }

    auto out = open_out(fs::path(out_dir) / "xi_sweep.csv");
    out << "sigma,xi,xi_over_sigma_alpha\n";
    for (double s : sigmas) {
        KernelConfig kc = base;
        kc.sigma = s;
        kc.kappa_min = std::exp(-kc.diameter * kc.diameter / (2.0 * s * s));
        const double xi = estimate_xi(kc, sample, cfg.xi.alpha, probes);
        out << csv_double(s) << ',' << csv_double(xi) << ','
            << csv_double(xi / std::pow(s, cfg.xi.alpha)) << '\n';
    }
    return 0;
}

}  // namespace qm
