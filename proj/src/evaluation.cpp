#include "qmeasure/evaluation.hpp"

#include <cmath>
#include <stdexcept>

namespace qm {

McResult mc_return(const Env& env, const PolicyFn& policy, double gamma, int episodes,
                   int horizon, std::uint64_t seed_base) {
    if (episodes < 1 || horizon < 1)
        throw std::invalid_argument("mc_return: episodes and horizon must be positive");
    std::vector<double> returns(episodes);
    std::uint64_t clipped = 0, steps = 0;
    for (int j = 0; j < episodes; ++j) {
        Rng rng(seed_base ^ static_cast<std::uint64_t>(j));
        std::vector<double> state = env.initial_state();
        double v = 0.0, discount = 1.0;
        for (int t = 0; t < horizon; ++t) {
            const Action a = policy(state, rng);
            Transition tr = env.step(state, a, rng);
            v += discount * tr.reward;
            discount *= gamma;
            if (tr.reward_clipped) ++clipped;
            ++steps;
            state = std::move(tr.next_state);
        }
        returns[j] = v;
    }
    double mean = 0.0;
    for (double v : returns) mean += v;
    mean /= episodes;
    double var = 0.0;
    for (double v : returns) var += (v - mean) * (v - mean);
    McResult res;
    res.mean = mean;
    res.std_err = episodes > 1 ? std::sqrt(var / (episodes - 1)) / std::sqrt(episodes) : 0.0;
    res.clip_rate = static_cast<double>(clipped) / static_cast<double>(steps);
    return res;
}

PolicyFn Snapshot::greedy_policy(const std::vector<Action>& actions) const {
    // Copies sit inside the closure so the policy outlives the snapshot.
    auto self = *this;
    return [self, actions](std::span<const double> state, Rng&) -> Action {
        LearnerState view;
        view.kernel_cfg = self.cfg;
        view.gamma = self.gamma;
        view.mu = self.mu;
        view.nu = self.nu;
        const int idx = greedy_finite(state, actions, view).first;
        return actions[static_cast<std::size_t>(idx)];
    };
}

std::vector<ProbePoint> default_probe_points(const GridQTable& reference,
                                             const std::vector<Action>& actions) {
    std::vector<ProbePoint> probes;
    probes.reserve(static_cast<std::size_t>(reference.num_cells()) * actions.size());
    for (int c = 0; c < reference.num_cells(); ++c) {
        const auto center = reference.cell_center(c);
        for (const Action& a : actions) probes.push_back({center, a});
    }
    return probes;
}

double rmse_on_grid(const Snapshot& snap, const GridQTable& reference,
                    const std::vector<ProbePoint>& probes) {
    if (probes.empty()) throw std::invalid_argument("rmse_on_grid: empty probe set");
    std::vector<double> pt(snap.cfg.point_dim());
    double acc = 0.0;
    for (const ProbePoint& p : probes) {
        for (int i = 0; i < snap.cfg.state_dim; ++i) pt[i] = p.state[i];
        if (snap.cfg.mode == ActionMode::ContinuousBox) {
            for (int i = 0; i < snap.cfg.action_dim; ++i)
                pt[snap.cfg.state_dim + i] = p.action.coords[i];
        } else {
            pt[snap.cfg.state_dim] = static_cast<double>(p.action.index);
        }
        const double err = snap.q_at(pt.data()) - reference.value_at(p.state, p.action.index);
        acc += err * err;
    }
    return std::sqrt(acc / static_cast<double>(probes.size()));
}

std::vector<std::int64_t> visitation_histogram(std::span<const double> states_flat,
                                               const Box& box, int bins) {
    if (bins < 1) throw std::invalid_argument("visitation_histogram: bins must be positive");
    std::vector<std::int64_t> counts(static_cast<std::size_t>(bins) * bins, 0);
    const std::size_t n = states_flat.size() / 2;
    for (std::size_t k = 0; k < n; ++k) {
        int idx = 0;
        for (int i = 0; i < 2; ++i) {
            const double w = (box.hi[i] - box.lo[i]) / bins;
            int c = static_cast<int>((states_flat[2 * k + i] - box.lo[i]) / w);
            c = std::max(0, std::min(c, bins - 1));
            idx = idx * bins + c;
        }
        counts[static_cast<std::size_t>(idx)]++;
    }
    return counts;
}

}  // namespace qm
