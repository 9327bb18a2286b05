#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "qmeasure/env.hpp"
#include "qmeasure/kernel.hpp"
#include "qmeasure/measure.hpp"
#include "qmeasure/rng.hpp"
#include "qmeasure/schedule.hpp"

namespace qm {

// Clamp to [-1/(1-gamma), 1/(1-gamma)], the range of any valid Q-function
// for rewards bounded by 1.
double clip(double x, double gamma);

struct TDRecord {
    std::uint64_t iteration = 0;
    double reward = 0.0;
    double target_y = 0.0;
    double greedy_value = 0.0;
    double step_seconds = 0.0;
};

// State of the online learner: the reference probability measure mu over
// visited pairs, the signed measure nu whose kernel smoothing (normalized
// by mu) is the current Q estimate, and the stepsize schedules. nu's
// support is always a prefix of mu's support, which lets every Q
// evaluation share one kernel pass over the trajectory.
struct LearnerState {
    KernelConfig kernel_cfg;
    double gamma = 0.7;
    StepSchedule alpha_schedule = StepSchedule::alpha_rm(1.0, 1.0);
    StepSchedule beta_schedule = StepSchedule::beta_uniform();
    WeightedMeasure mu;
    WeightedMeasure nu;
    std::uint64_t iteration = 0;
    std::vector<double> last_point;  // flat Z_n

    // Gradient-ascent settings for continuous action maximization.
    int argmax_steps = 50;
    int argmax_restarts = 4;
    double argmax_eta = 0.0;  // 0 means 0.1 * action-box diagonal
    Rng argmax_rng{0};

    static LearnerState init(const KernelConfig& cfg, double gamma,
                             const StepSchedule& alpha, const StateAction& z0);

    double q_at(const double* z_flat) const {
        return reconstruct_q_shared(kernel_cfg, nu, mu, z_flat);
    }
};

// Argmax over a finite candidate set of q(state, a), clipped per action;
// ties broken by the lowest action index.
std::pair<int, double> greedy_finite(std::span<const double> state,
                                     const std::vector<Action>& actions,
                                     const LearnerState& ls);

// Projected gradient ascent on a -> q(state, a) over the action box, from
// `restarts` uniform starting points, `steps` iterations each, stepsize
// eta, componentwise clamp projection. Returns the best (action, clipped
// value) found; deterministic given the rng stream.
std::pair<std::vector<double>, double> greedy_continuous(std::span<const double> state,
                                                         const Box& action_box,
                                                         const LearnerState& ls, int steps,
                                                         int restarts, double eta, Rng& rng);

// Y = reward + gamma * max_a clip(q(next_state, a)). |Y| <= 1/(1-gamma)
// whenever |reward| <= 1.
double td_target(double reward, std::span<const double> next_state,
                 const std::vector<Action>& finite_actions, const LearnerState& ls);

// One online step: computes Y from the pre-update measures, applies the
// nu update at the previous pair with alpha_{n+1}, the mu update at the
// new pair with beta_{n+1}, and advances the iteration counter.
TDRecord train_step(LearnerState& ls, const Transition& tr,
                    const std::vector<Action>& finite_actions);

// Continuous-action variant; the TD maximization runs gradient ascent over
// the box using ls.argmax_* settings and ls.argmax_rng.
TDRecord train_step_continuous(LearnerState& ls, const Transition& tr, const Box& action_box);

}  // namespace qm
