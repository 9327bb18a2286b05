#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "qmeasure/env.hpp"

namespace qm {

// Two-item lost-sales inventory control. State is the on-hand inventory
// vector in [0, i_max]^2; actions are integer order quantities
// {0..a_max[0]} x {0..a_max[1]}; demand is |G| with G bivariate normal.
// Costs are normalized by c_max and negated into rewards clamped to
// [-1, 1].
struct InventoryParams {
    double i_max = 15.0;
    std::array<int, 2> a_max{10, 8};
    std::array<double, 2> order_cost{0.3, 0.35};
    std::array<double, 2> holding_cost{0.05, 0.04};
    std::array<double, 2> lostsale_cost{0.8, 0.9};
    double fixed_cost = 0.2;
    std::array<double, 2> demand_mean{5.0, 4.0};
    std::array<std::array<double, 2>, 2> demand_cov{{{3.0, -0.21}, {-0.21, 1.0}}};
    double c_max = 1.0;

    void validate() const;  // SPD covariance, positive capacities and c_max

    static InventoryParams baseline();     // the 99-action instance
    static InventoryParams small_scale();  // a_max = (4, 3), 20 actions
};

// Baseline params with demand mean replaced by (8, 7), same covariance;
// under this demand the behavior policy only reaches the low-inventory
// corner of the state space.
InventoryParams shifted_demand_params(const InventoryParams& base);

// Lower-triangular Cholesky factor of the 2x2 covariance: (l11, l21, l22).
std::array<double, 3> cholesky2(const std::array<std::array<double, 2>, 2>& cov);

class InventoryEnv final : public Env {
  public:
    explicit InventoryEnv(InventoryParams params);

    const InventoryParams& params() const { return params_; }
    const std::vector<Action>& action_set() const override { return actions_; }
    std::vector<double> initial_state() const override { return {0.0, 0.0}; }
    Box state_box() const override;
    Box action_box() const;

    std::array<double, 2> sample_demand(Rng& rng) const;

    // Deterministic transition given an explicit demand vector; also
    // reports the raw (unnormalized) cost. Used by tests and by the
    // dynamic-programming benchmark.
    Transition step_with_demand(std::span<const double> state, const Action& a,
                                std::span<const double> demand, Rng& rng,
                                double* raw_cost = nullptr) const;

    Transition step(std::span<const double> state, const Action& a, Rng& rng) const override;

    // ContinuousBox kernel over (state, embedded action); the diameter is
    // the exact box diagonal of the joint domain.
    KernelConfig make_kernel(double sigma) const override;
    KernelConfig make_kernel_finite(double sigma) const;

  private:
    InventoryParams params_;
    std::vector<Action> actions_;
    std::array<double, 3> chol_;
};

// Empirical `quantile` of the raw one-step cost over a pilot run of the
// uniform behavior policy from (0, 0). Floored at 1e-6.
double estimate_c_max(const InventoryParams& params_without_cmax, std::uint64_t pilot_steps,
                      double quantile, Rng& rng);

}  // namespace qm
