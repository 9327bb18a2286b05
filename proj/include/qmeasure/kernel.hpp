#pragma once

#include <cstdint>
#include <vector>

namespace qm {

// Action space geometry. ContinuousBox treats actions as vectors in a
// compact box; FiniteActions uses action indices with the 0-1 metric on
// the action coordinate.
enum class ActionMode { ContinuousBox, FiniteActions };

// Gaussian kernel configuration over state-action pairs. The squared
// distance is Euclidean over (state, action) coordinates in ContinuousBox
// mode, and |x-y|^2 + 1{i != j} in FiniteActions mode. kappa_min is the
// kernel value at the declared domain diameter and lower-bounds the kernel
// on the domain.
struct KernelConfig {
    double sigma = 1.0;
    ActionMode mode = ActionMode::ContinuousBox;
    int state_dim = 1;
    int action_dim = 1;  // ContinuousBox only; ignored in FiniteActions
    double diameter = 0.0;
    double kappa_min = 1.0;

    // Points are stored flat as [state..., action coords...] or
    // [state..., action index].
    int point_dim() const {
        return state_dim + (mode == ActionMode::ContinuousBox ? action_dim : 1);
    }

    static KernelConfig continuous_box(double sigma, int state_dim, int action_dim,
                                       double diameter);
    static KernelConfig finite_actions(double sigma, int state_dim, double diameter);
};

// A state-action pair in structured form. In ContinuousBox mode `action`
// holds the action coordinates; in FiniteActions mode `action_index` holds
// the index and `action` stays empty.
struct StateAction {
    std::vector<double> state;
    std::vector<double> action;
    int action_index = 0;
};

void flatten(const KernelConfig& cfg, const StateAction& z, double* out);
std::vector<double> flatten(const KernelConfig& cfg, const StateAction& z);

// Squared distance d(z,u)^2 between flat points (unchecked hot path).
double squared_distance(const KernelConfig& cfg, const double* z, const double* u);

// Kernel value exp(-d(z,u)^2 / (2 sigma^2)), in (0, 1].
double eval_kernel(const KernelConfig& cfg, const double* z, const double* u);
double eval_kernel(const KernelConfig& cfg, const StateAction& z, const StateAction& u);

// kappa_min = exp(-diameter^2 / (2 sigma^2)).
double kernel_lower_bound(const KernelConfig& cfg);

// Instrumentation: running count of kernel evaluations, including the ones
// done inside batched measure sums.
std::uint64_t kernel_eval_count();
void reset_kernel_eval_count();
void add_kernel_evals(std::uint64_t n);

}  // namespace qm
