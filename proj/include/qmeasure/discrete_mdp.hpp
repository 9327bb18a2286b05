#pragma once

#include <vector>

#include "qmeasure/env.hpp"

namespace qm {

// Small finite MDP with states embedded in R^1, used as an exactly
// solvable instance: transition rows and rewards are tables, the behavior
// policy is uniform, and the stationary distribution of the induced
// state-action chain is computed by a direct linear solve.
struct DiscreteTestMDP {
    std::vector<double> states;  // embedded state points
    int num_actions = 2;
    // transition[s * num_actions + a][s'] = P(s' | s, a)
    std::vector<std::vector<double>> transition;
    // rewards[s * num_actions + a] in [-1, 1], deterministic
    std::vector<double> rewards;

    int num_states() const { return static_cast<int>(states.size()); }
    int num_pairs() const { return num_states() * num_actions; }
    void validate() const;  // rows sum to 1 within 1e-12, rewards bounded

    // Stationary distribution over (state, action) pairs under the uniform
    // behavior policy.
    std::vector<double> stationary_distribution() const;

    static DiscreteTestMDP default_instance();
};

Transition discrete_mdp_step(const DiscreteTestMDP& mdp, int state_index, int action_index,
                             Rng& rng);

class DiscreteMdpEnv final : public Env {
  public:
    explicit DiscreteMdpEnv(DiscreteTestMDP mdp);

    const DiscreteTestMDP& mdp() const { return mdp_; }
    const std::vector<Action>& action_set() const override { return actions_; }
    std::vector<double> initial_state() const override { return {mdp_.states[0]}; }
    Box state_box() const override;
    Transition step(std::span<const double> state, const Action& a, Rng& rng) const override;
    KernelConfig make_kernel(double sigma) const override;

    int state_index_of(double embedded) const;

  private:
    DiscreteTestMDP mdp_;
    std::vector<Action> actions_;
};

}  // namespace qm
