#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "qmeasure/env.hpp"
#include "qmeasure/inventory.hpp"
#include "qmeasure/measure.hpp"
#include "qmeasure/rng.hpp"

namespace qm {

// Q-values on a quantized 2-D state grid crossed with a finite action set.
// Cell values are constant within each square; lookups snap a state to its
// containing cell, with the upper boundary mapped into the last cell.
struct GridQTable {
    Box box;
    int cells_per_axis = 25;
    int num_actions = 0;
    std::vector<double> values;  // cell-major, then action
    bool converged = false;
    double residual = 0.0;
    int sweeps = 0;
    std::vector<double> sweep_changes;  // sup-change per sweep; not serialized

    int num_cells() const { return cells_per_axis * cells_per_axis; }
    int cell_index(std::span<const double> state) const;
    std::vector<double> cell_center(int cell) const;
    double value_at(std::span<const double> state, int action) const;
    double& value(int cell, int action) {
        return values[static_cast<std::size_t>(cell) * num_actions + action];
    }
    double value(int cell, int action) const {
        return values[static_cast<std::size_t>(cell) * num_actions + action];
    }
};

void save_table(const GridQTable& t, std::ostream& os);
GridQTable load_table(std::istream& is);

// Value iteration for the inventory model on the quantized grid:
//   Q <- r_hat + gamma * mean_m max_a' clip(Q(cell(x'_m), a'))
// with one shared set of Monte Carlo demand draws reused across sweeps, so
// the sweep map is a deterministic gamma-contraction. Stops when the sup
// change drops below tol; otherwise returns with converged = false.
GridQTable dp_value_iteration(const InventoryParams& params, int cells_per_axis,
                              int demand_samples, double gamma, double tol, int max_sweeps,
                              Rng& rng);

// Expected one-step lookahead data for each support point z_k: the reward
// r_hat(z_k) and a weighted set of next states (exact probabilities or
// Monte Carlo samples with weight 1/M), plus the finite candidate actions
// used inside the max.
struct BellmanModel {
    std::vector<double> rewards;
    std::vector<std::vector<std::pair<double, std::vector<double>>>> next_states;
    std::vector<Action> actions;
};

// Exact lookahead rows for a support drawn from a DiscreteTestMDP.
struct DiscreteTestMDP;
BellmanModel exact_bellman_model(const DiscreteTestMDP& mdp, const KernelConfig& cfg,
                                 const WeightedMeasure& mu);
// Sampled lookahead rows: M next states per support point, drawn once.
BellmanModel sampled_bellman_model(const Env& env, const KernelConfig& cfg,
                                   const WeightedMeasure& mu, int samples_per_point, Rng& rng);

// One application of the smoothed clipped Bellman operator to the function
// with the given values at mu's support points: returns T_bar[q] at the
// support, where q is the normalized kernel smoothing of `values` by mu.
std::vector<double> smoothed_bellman_apply(const KernelConfig& cfg, const WeightedMeasure& mu,
                                           const BellmanModel& model, double gamma,
                                           const std::vector<double>& values);

// Fixed point of the smoothed clipped Bellman operator restricted to the
// support of mu. Stored as the signed measure with weights
// T_bar[q*](z_k) * mu_k, whose mu-normalized kernel smoothing evaluates q*
// anywhere.
struct SmoothedFixedPoint {
    KernelConfig cfg;
    WeightedMeasure mu;
    std::vector<double> bellman_values;
    bool converged = false;
    double residual = 0.0;
    int iterations = 0;

    WeightedMeasure nu_star() const { return scaled_by_values(mu, bellman_values); }
    double q_at(const double* z_flat) const;
    double q_at(const StateAction& z) const;
};

SmoothedFixedPoint smoothed_fixed_point(const KernelConfig& cfg, const WeightedMeasure& mu,
                                        const BellmanModel& model, double gamma, double tol,
                                        int max_iters);

// Kernel-weighted mean alpha-power distance over an empirical sample,
// maximized over the probe grid:
//   max_z (sum_k d(z,u_k)^alpha kappa(z,u_k)) / (sum_k kappa(z,u_k)).
// Bounds the smoothing bias of the fixed point via bias_bound.
double estimate_xi(const KernelConfig& cfg, const std::vector<double>& sample_points_flat,
                   double alpha, const std::vector<double>& probe_grid_flat);

// L_Q * xi / (1 - gamma).
double bias_bound(double xi, double lipschitz, double gamma);

}  // namespace qm
