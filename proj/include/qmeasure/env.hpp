#pragma once

#include <span>
#include <vector>

#include "qmeasure/kernel.hpp"
#include "qmeasure/rng.hpp"

namespace qm {

// Axis-aligned box, used for state spaces and continuous action spaces.
struct Box {
    std::vector<double> lo;
    std::vector<double> hi;

    int dim() const { return static_cast<int>(lo.size()); }
    bool contains(std::span<const double> x) const {
        for (int i = 0; i < dim(); ++i)
            if (x[i] < lo[i] || x[i] > hi[i]) return false;
        return true;
    }
    double diagonal() const;
};

// One action: an index into the finite action set plus, when the kernel
// embeds actions in a box, its coordinates.
struct Action {
    int index = 0;
    std::vector<double> coords;
};

struct Transition {
    double reward = 0.0;  // in [-1, 1]
    std::vector<double> next_state;
    Action next_action;        // drawn by the behavior policy
    bool reward_clipped = false;  // raw normalized reward fell outside [-1, 1]
};

// Controlled Markov chain with a finite action set. Stateless given
// (state, action, rng), so independent rng streams allow parallel rollouts.
class Env {
  public:
    virtual ~Env() = default;

    virtual const std::vector<Action>& action_set() const = 0;
    virtual std::vector<double> initial_state() const = 0;
    virtual Box state_box() const = 0;
    virtual Transition step(std::span<const double> state, const Action& a, Rng& rng) const = 0;
    virtual KernelConfig make_kernel(double sigma) const = 0;

    Action sample_behavior_action(Rng& rng) const;
};

// pi_b(a|x) = 1/|A|: uniform draw over the action indices.
int uniform_behavior_policy(int num_actions, Rng& rng);

}  // namespace qm
