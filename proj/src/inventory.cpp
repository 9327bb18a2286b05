#include "qmeasure/inventory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qm {

void InventoryParams::validate() const {
    if (!(i_max > 0.0)) throw std::invalid_argument("inventory: i_max must be positive");
    if (a_max[0] < 0 || a_max[1] < 0)
        throw std::invalid_argument("inventory: a_max must be nonnegative");
    if (!(c_max > 0.0)) throw std::invalid_argument("inventory: c_max must be positive");
    if (fixed_cost < 0.0) throw std::invalid_argument("inventory: fixed_cost must be nonnegative");
    cholesky2(demand_cov);  // throws unless symmetric positive definite
}

InventoryParams InventoryParams::baseline() {
    InventoryParams p;
    // c_max frozen from estimate_c_max (0.999 quantile, 1e5 pilot steps,
    // the repo's demand-pilot stream); see tests/test_env.cpp golden.
    p.c_max = 9.1144636157820411;
    return p;
}

InventoryParams InventoryParams::small_scale() {
    // Desk-scale variant: the action box shrinks to 20 orders and demand is
    // halved with it (mean / 2, covariance / 4, same correlation), so orders
    // can still cover demand as in the full-size instance.
    InventoryParams p;
    p.a_max = {4, 3};
    p.demand_mean = {2.5, 2.0};
    p.demand_cov = {{{0.75, -0.0525}, {-0.0525, 0.25}}};
    p.c_max = 5.095929789319781;
    return p;
}

InventoryParams shifted_demand_params(const InventoryParams& base) {
    InventoryParams p = base;
    p.demand_mean = {8.0, 7.0};
    return p;
}

std::array<double, 3> cholesky2(const std::array<std::array<double, 2>, 2>& cov) {
    const double a = cov[0][0], b = cov[0][1], c = cov[1][0], d = cov[1][1];
    if (b != c) throw std::invalid_argument("inventory: covariance is not symmetric");
    if (!(a > 0.0)) throw std::invalid_argument("inventory: covariance is not positive definite");
    const double l11 = std::sqrt(a);
    const double l21 = b / l11;
    const double rem = d - l21 * l21;
    if (!(rem > 0.0)) throw std::invalid_argument("inventory: covariance is not positive definite");
    return {l11, l21, std::sqrt(rem)};
}

InventoryEnv::InventoryEnv(InventoryParams params) : params_(std::move(params)) {
    params_.validate();
    chol_ = cholesky2(params_.demand_cov);
    const int n1 = params_.a_max[0] + 1, n2 = params_.a_max[1] + 1;
    actions_.reserve(static_cast<std::size_t>(n1) * n2);
    for (int a1 = 0; a1 < n1; ++a1)
        for (int a2 = 0; a2 < n2; ++a2) {
            Action a;
            a.index = a1 * n2 + a2;
            a.coords = {static_cast<double>(a1), static_cast<double>(a2)};
            actions_.push_back(std::move(a));
        }
}

Box InventoryEnv::state_box() const {
    return Box{{0.0, 0.0}, {params_.i_max, params_.i_max}};
}

Box InventoryEnv::action_box() const {
    return Box{{0.0, 0.0},
               {static_cast<double>(params_.a_max[0]), static_cast<double>(params_.a_max[1])}};
}

std::array<double, 2> InventoryEnv::sample_demand(Rng& rng) const {
    const auto [z1, z2] = rng.normal_pair();
    const double g1 = params_.demand_mean[0] + chol_[0] * z1;
    const double g2 = params_.demand_mean[1] + chol_[1] * z1 + chol_[2] * z2;
    return {std::abs(g1), std::abs(g2)};
}

Transition InventoryEnv::step_with_demand(std::span<const double> state, const Action& a,
                                          std::span<const double> demand, Rng& rng,
                                          double* raw_cost) const {
    if (a.coords.size() != 2)
        throw std::invalid_argument("inventory: action must carry two order coordinates");
    const double a1 = a.coords[0], a2 = a.coords[1];
    if (a1 < 0 || a2 < 0 || a1 > params_.a_max[0] || a2 > params_.a_max[1])
        throw std::invalid_argument("inventory: action out of range");

    Transition tr;
    tr.next_state.resize(2);
    double cost = params_.fixed_cost * ((a1 + a2 > 0.0) ? 1.0 : 0.0);
    cost += params_.order_cost[0] * a1 + params_.order_cost[1] * a2;
    for (int i = 0; i < 2; ++i) {
        const double ai = i == 0 ? a1 : a2;
        const double post = state[i] + ai - demand[i];
        tr.next_state[i] = std::min(std::max(post, 0.0), params_.i_max);
        cost += params_.holding_cost[i] * tr.next_state[i];
        cost += params_.lostsale_cost[i] * std::max(demand[i] - state[i] - ai, 0.0);
    }
    if (raw_cost) *raw_cost = cost;

    const double raw_reward = -cost / params_.c_max;
    tr.reward = std::min(std::max(raw_reward, -1.0), 1.0);
    tr.reward_clipped = raw_reward < -1.0 || raw_reward > 1.0;
    tr.next_action = sample_behavior_action(rng);
    return tr;
}

Transition InventoryEnv::step(std::span<const double> state, const Action& a, Rng& rng) const {
    const auto d = sample_demand(rng);
    return step_with_demand(state, a, d, rng);
}

KernelConfig InventoryEnv::make_kernel(double sigma) const {
    const double sd = state_box().diagonal();
    const double ad = action_box().diagonal();
    return KernelConfig::continuous_box(sigma, 2, 2, std::sqrt(sd * sd + ad * ad));
}

KernelConfig InventoryEnv::make_kernel_finite(double sigma) const {
    const double sd = state_box().diagonal();
    return KernelConfig::finite_actions(sigma, 2, std::sqrt(sd * sd + 1.0));
}

double estimate_c_max(const InventoryParams& params_without_cmax, std::uint64_t pilot_steps,
                      double quantile, Rng& rng) {
    if (pilot_steps < 1000) throw std::invalid_argument("estimate_c_max: pilot too short");
    if (!(quantile > 0.0 && quantile <= 1.0))
        throw std::invalid_argument("estimate_c_max: quantile must lie in (0, 1]");
    InventoryParams p = params_without_cmax;
    p.c_max = 1.0;  // irrelevant for raw costs
    InventoryEnv env(p);

    std::vector<double> costs;
    costs.reserve(pilot_steps);
    std::vector<double> state = env.initial_state();
    Action a = env.sample_behavior_action(rng);
    for (std::uint64_t t = 0; t < pilot_steps; ++t) {
        const auto d = env.sample_demand(rng);
        double cost = 0.0;
        Transition tr = env.step_with_demand(state, a, d, rng, &cost);
        costs.push_back(cost);
        state = std::move(tr.next_state);
        a = std::move(tr.next_action);
    }
    std::sort(costs.begin(), costs.end());
    const double idx = std::ceil(quantile * static_cast<double>(costs.size())) - 1.0;
    const std::size_t i =
        static_cast<std::size_t>(std::max(0.0, std::min(idx, static_cast<double>(costs.size() - 1))));
    return std::max(costs[i], 1e-6);
}

}  // namespace qm
