#include "qmeasure/benchmark.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <ostream>
#include <stdexcept>

#include "qmeasure/discrete_mdp.hpp"
#include "qmeasure/learner.hpp"

namespace qm {

int GridQTable::cell_index(std::span<const double> state) const {
    int idx = 0;
    for (int i = 0; i < 2; ++i) {
        if (state[i] < box.lo[i] || state[i] > box.hi[i])
            throw std::invalid_argument("grid table: state outside the grid box");
        const double w = (box.hi[i] - box.lo[i]) / cells_per_axis;
        int c = static_cast<int>((state[i] - box.lo[i]) / w);
        c = std::min(c, cells_per_axis - 1);  // upper boundary into last cell
        idx = idx * cells_per_axis + c;
    }
    return idx;
}

std::vector<double> GridQTable::cell_center(int cell) const {
    const int c0 = cell / cells_per_axis, c1 = cell % cells_per_axis;
    const double w0 = (box.hi[0] - box.lo[0]) / cells_per_axis;
    const double w1 = (box.hi[1] - box.lo[1]) / cells_per_axis;
    return {box.lo[0] + (c0 + 0.5) * w0, box.lo[1] + (c1 + 0.5) * w1};
}

double GridQTable::value_at(std::span<const double> state, int action) const {
    return value(cell_index(state), action);
}

namespace {
constexpr std::uint32_t kTableMagic = 0x514d4754;  // "QMGT"
constexpr std::uint32_t kTableVersion = 1;

template <typename T>
void put(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof v);
}
template <typename T>
void get(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof v);
    if (!is) throw std::runtime_error("grid table: truncated file");
}
}  // namespace

void save_table(const GridQTable& t, std::ostream& os) {
    put(os, kTableMagic);
    put(os, kTableVersion);
    put(os, t.box.lo[0]);
    put(os, t.box.lo[1]);
    put(os, t.box.hi[0]);
    put(os, t.box.hi[1]);
    put(os, static_cast<std::uint32_t>(t.cells_per_axis));
    put(os, static_cast<std::uint32_t>(t.num_actions));
    put(os, static_cast<std::uint8_t>(t.converged ? 1 : 0));
    put(os, t.residual);
    put(os, static_cast<std::uint32_t>(t.sweeps));
    const std::uint64_t n = t.values.size();
    put(os, n);
    os.write(reinterpret_cast<const char*>(t.values.data()),
             static_cast<std::streamsize>(n * sizeof(double)));
}

GridQTable load_table(std::istream& is) {
    std::uint32_t magic = 0, version = 0;
    get(is, magic);
    get(is, version);
    if (magic != kTableMagic || version != kTableVersion)
        throw std::runtime_error("grid table: unrecognized header");
    GridQTable t;
    t.box.lo.resize(2);
    t.box.hi.resize(2);
    get(is, t.box.lo[0]);
    get(is, t.box.lo[1]);
    get(is, t.box.hi[0]);
    get(is, t.box.hi[1]);
    std::uint32_t cells = 0, actions = 0, sweeps = 0;
    std::uint8_t conv = 0;
    get(is, cells);
    get(is, actions);
    get(is, conv);
    get(is, t.residual);
    get(is, sweeps);
    t.cells_per_axis = static_cast<int>(cells);
    t.num_actions = static_cast<int>(actions);
    t.converged = conv != 0;
    t.sweeps = static_cast<int>(sweeps);
    std::uint64_t n = 0;
    get(is, n);
    t.values.resize(n);
    is.read(reinterpret_cast<char*>(t.values.data()),
            static_cast<std::streamsize>(n * sizeof(double)));
    if (!is) throw std::runtime_error("grid table: truncated file");
    return t;
}

GridQTable dp_value_iteration(const InventoryParams& params, int cells_per_axis,
                              int demand_samples, double gamma, double tol, int max_sweeps,
                              Rng& rng) {
    if (!(tol > 0.0)) throw std::invalid_argument("dp: tol must be positive");
    InventoryEnv env(params);
    const auto& actions = env.action_set();
    const int na = static_cast<int>(actions.size());

    GridQTable table;
    table.box = env.state_box();
    table.cells_per_axis = cells_per_axis;
    table.num_actions = na;
    table.values.assign(static_cast<std::size_t>(table.num_cells()) * na, 0.0);

    // Shared demand draws; per (cell, action) the next-cell distribution
    // and mean reward are aggregated once, which makes each sweep a cheap
    // pass over sparse rows while computing the exact same sample mean.
    std::vector<std::array<double, 2>> demands(demand_samples);
    for (auto& d : demands) d = env.sample_demand(rng);

    const int cells = table.num_cells();
    struct Row {
        double reward = 0.0;
        std::vector<std::pair<int, double>> next;  // (cell, weight), weights sum to 1
    };
    std::vector<Row> rows(static_cast<std::size_t>(cells) * na);
    Rng dummy(0);  // step_with_demand draws the next behavior action; unused here
    std::vector<double> state(2);
    std::map<int, int> counts;
    for (int c = 0; c < cells; ++c) {
        const auto center = table.cell_center(c);
        for (int a = 0; a < na; ++a) {
            Row& row = rows[static_cast<std::size_t>(c) * na + a];
            counts.clear();
            double rsum = 0.0;
            for (const auto& d : demands) {
                Transition tr = env.step_with_demand(center, actions[a], d, dummy);
                rsum += tr.reward;
                counts[table.cell_index(tr.next_state)]++;
            }
            row.reward = rsum / demand_samples;
            row.next.reserve(counts.size());
            for (const auto& [cell, n] : counts)
                row.next.emplace_back(cell, static_cast<double>(n) / demand_samples);
        }
    }

    std::vector<double> best(cells);
    table.residual = std::numeric_limits<double>::infinity();
    for (int sweep = 1; sweep <= max_sweeps; ++sweep) {
        for (int c = 0; c < cells; ++c) {
            double b = clip(table.value(c, 0), gamma);
            for (int a = 1; a < na; ++a) b = std::max(b, clip(table.value(c, a), gamma));
            best[c] = b;
        }
        double change = 0.0;
        for (int c = 0; c < cells; ++c) {
            for (int a = 0; a < na; ++a) {
                const Row& row = rows[static_cast<std::size_t>(c) * na + a];
                double exp_next = 0.0;
                for (const auto& [cell, w] : row.next) exp_next += w * best[cell];
                const double q = row.reward + gamma * exp_next;
                change = std::max(change, std::abs(q - table.value(c, a)));
                table.value(c, a) = q;
            }
        }
        table.sweeps = sweep;
        table.residual = change;
        table.sweep_changes.push_back(change);
        if (change < tol) {
            table.converged = true;
            break;
        }
    }
    return table;
}

BellmanModel exact_bellman_model(const DiscreteTestMDP& mdp, const KernelConfig& cfg,
                                 const WeightedMeasure& mu) {
    BellmanModel model;
    model.actions.resize(mdp.num_actions);
    for (int i = 0; i < mdp.num_actions; ++i) model.actions[i].index = i;
    const std::size_t n = mu.size();
    model.rewards.resize(n);
    model.next_states.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double* z = mu.point(k);
        int s = -1;
        for (int i = 0; i < mdp.num_states(); ++i)
            if (mdp.states[i] == z[0]) s = i;
        if (s < 0) throw std::invalid_argument("bellman model: support point off the state set");
        const int a = static_cast<int>(z[cfg.state_dim]);
        model.rewards[k] = mdp.rewards[s * mdp.num_actions + a];
        const auto& row = mdp.transition[s * mdp.num_actions + a];
        for (int sp = 0; sp < mdp.num_states(); ++sp)
            if (row[sp] > 0.0)
                model.next_states[k].push_back({row[sp], {mdp.states[sp]}});
    }
    return model;
}

BellmanModel sampled_bellman_model(const Env& env, const KernelConfig& cfg,
                                   const WeightedMeasure& mu, int samples_per_point, Rng& rng) {
    BellmanModel model;
    model.actions = env.action_set();
    const std::size_t n = mu.size();
    model.rewards.resize(n);
    model.next_states.resize(n);
    const double w = 1.0 / samples_per_point;
    for (std::size_t k = 0; k < n; ++k) {
        const double* z = mu.point(k);
        std::span<const double> state(z, static_cast<std::size_t>(cfg.state_dim));
        Action a;
        if (cfg.mode == ActionMode::ContinuousBox) {
            a.coords.assign(z + cfg.state_dim, z + cfg.state_dim + cfg.action_dim);
        } else {
            a.index = static_cast<int>(z[cfg.state_dim]);
        }
        double rsum = 0.0;
        model.next_states[k].reserve(samples_per_point);
        for (int m = 0; m < samples_per_point; ++m) {
            Transition tr = env.step(state, a, rng);
            rsum += tr.reward;
            model.next_states[k].push_back({w, std::move(tr.next_state)});
        }
        model.rewards[k] = rsum * w;
    }
    return model;
}

std::vector<double> smoothed_bellman_apply(const KernelConfig& cfg, const WeightedMeasure& mu,
                                           const BellmanModel& model, double gamma,
                                           const std::vector<double>& values) {
    if (values.size() != mu.size())
        throw std::invalid_argument("smoothed bellman: value vector size mismatch");
    const WeightedMeasure nu = scaled_by_values(mu, values);

    // q = Phi_mu[nu] is the smoothing of `values`; evaluate the clipped
    // greedy lookahead at every next state of every support point.
    std::vector<double> pt(cfg.point_dim());
    std::vector<double> out(mu.size());
    for (std::size_t k = 0; k < mu.size(); ++k) {
        double exp_next = 0.0;
        for (const auto& [w, next_state] : model.next_states[k]) {
            double best = 0.0;
            for (std::size_t i = 0; i < model.actions.size(); ++i) {
                for (int j = 0; j < cfg.state_dim; ++j) pt[j] = next_state[j];
                if (cfg.mode == ActionMode::ContinuousBox) {
                    for (int j = 0; j < cfg.action_dim; ++j)
                        pt[cfg.state_dim + j] = model.actions[i].coords[j];
                } else {
                    pt[cfg.state_dim] = static_cast<double>(model.actions[i].index);
                }
                const double v = clip(reconstruct_q(cfg, nu, mu, pt.data()), gamma);
                if (i == 0 || v > best) best = v;
            }
            exp_next += w * best;
        }
        out[k] = model.rewards[k] + gamma * exp_next;
    }
    return out;
}

double SmoothedFixedPoint::q_at(const double* z_flat) const {
    return reconstruct_q(cfg, nu_star(), mu, z_flat);
}

double SmoothedFixedPoint::q_at(const StateAction& z) const {
    const auto zf = flatten(cfg, z);
    return q_at(zf.data());
}

SmoothedFixedPoint smoothed_fixed_point(const KernelConfig& cfg, const WeightedMeasure& mu,
                                        const BellmanModel& model, double gamma, double tol,
                                        int max_iters) {
    if (mu.empty()) throw std::invalid_argument("smoothed_fixed_point: empty support");
    SmoothedFixedPoint fp;
    fp.cfg = cfg;
    fp.mu = mu;
    fp.bellman_values.assign(mu.size(), 0.0);
    fp.residual = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iters; ++it) {
        std::vector<double> next = smoothed_bellman_apply(cfg, mu, model, gamma,
                                                          fp.bellman_values);
        double change = 0.0;
        for (std::size_t k = 0; k < next.size(); ++k)
            change = std::max(change, std::abs(next[k] - fp.bellman_values[k]));
        fp.bellman_values = std::move(next);
        fp.iterations = it;
        fp.residual = change;
        if (change < tol) {
            fp.converged = true;
            break;
        }
    }
    return fp;
}

double estimate_xi(const KernelConfig& cfg, const std::vector<double>& sample_points_flat,
                   double alpha, const std::vector<double>& probe_grid_flat) {
    const int dim = cfg.point_dim();
    if (sample_points_flat.empty() || sample_points_flat.size() % dim != 0)
        throw std::invalid_argument("estimate_xi: bad sample buffer");
    if (probe_grid_flat.empty() || probe_grid_flat.size() % dim != 0)
        throw std::invalid_argument("estimate_xi: bad probe buffer");
    const std::size_t n = sample_points_flat.size() / dim;
    const std::size_t np = probe_grid_flat.size() / dim;
    const double inv_two_sigma2 = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
    const double half_alpha = 0.5 * alpha;
    double best = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
        const double* z = probe_grid_flat.data() + p * dim;
        double num = 0.0, den = 0.0;
        for (std::size_t k = 0; k < n; ++k) {
            const double d2 = squared_distance(cfg, z, sample_points_flat.data() + k * dim);
            const double kv = std::exp(-d2 * inv_two_sigma2);
            num += std::pow(d2, half_alpha) * kv;
            den += kv;
        }
        add_kernel_evals(n);
        best = std::max(best, num / den);
    }
    return best;
}

double bias_bound(double xi, double lipschitz, double gamma) {
    if (xi < 0.0 || lipschitz < 0.0 || !(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("bias_bound: invalid arguments");
    return lipschitz * xi / (1.0 - gamma);
}

}  // namespace qm
