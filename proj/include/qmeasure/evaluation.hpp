#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "qmeasure/benchmark.hpp"
#include "qmeasure/env.hpp"
#include "qmeasure/learner.hpp"

namespace qm {

struct EvalReport {
    std::uint64_t iteration = 0;
    double mc_return_mean = 0.0;
    double mc_return_stderr = 0.0;
    double rmse_vs_reference = 0.0;
    double clip_rate = 0.0;
    int episodes = 0;
    int horizon = 0;
};

using PolicyFn = std::function<Action(std::span<const double> state, Rng& rng)>;

struct McResult {
    double mean = 0.0;
    double std_err = 0.0;
    double clip_rate = 0.0;
};

// Mean and standard error of the discounted return over independent
// episodes of fixed horizon from the environment's initial state. Episode
// j uses its own stream seeded with seed_base xor j, so results do not
// depend on evaluation order.
McResult mc_return(const Env& env, const PolicyFn& policy, double gamma, int episodes,
                   int horizon, std::uint64_t seed_base);

// Frozen snapshot of the learner's measures; evaluates q and greedy
// actions without touching the live training state.
struct Snapshot {
    KernelConfig cfg;
    double gamma = 0.7;
    WeightedMeasure mu;
    WeightedMeasure nu;
    std::uint64_t iteration = 0;

    static Snapshot of(const LearnerState& ls) {
        return Snapshot{ls.kernel_cfg, ls.gamma, ls.mu, ls.nu, ls.iteration};
    }
    double q_at(const double* z_flat) const { return reconstruct_q_shared(cfg, nu, mu, z_flat); }
    PolicyFn greedy_policy(const std::vector<Action>& actions) const;
};

struct ProbePoint {
    std::vector<double> state;
    Action action;
};

// Cell centers of the reference table crossed with all actions.
std::vector<ProbePoint> default_probe_points(const GridQTable& reference,
                                             const std::vector<Action>& actions);

// sqrt(mean over probes of (q_snapshot(z) - reference(z))^2).
double rmse_on_grid(const Snapshot& snap, const GridQTable& reference,
                    const std::vector<ProbePoint>& probes);

// Counts of visited states per uniform cell over the state box; row-major
// bins x bins. states_flat holds 2-D states.
std::vector<std::int64_t> visitation_histogram(std::span<const double> states_flat,
                                               const Box& box, int bins);

}  // namespace qm
