#include "qmeasure/discrete_mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace qm {

void DiscreteTestMDP::validate() const {
    const int pairs = num_pairs();
    if (static_cast<int>(transition.size()) != pairs ||
        static_cast<int>(rewards.size()) != pairs)
        throw std::invalid_argument("discrete mdp: table size mismatch");
    for (const auto& row : transition) {
        if (static_cast<int>(row.size()) != num_states())
            throw std::invalid_argument("discrete mdp: transition row size mismatch");
        double s = 0.0;
        for (double p : row) {
            if (p < 0.0) throw std::invalid_argument("discrete mdp: negative probability");
            s += p;
        }
        if (std::abs(s - 1.0) > 1e-12)
            throw std::invalid_argument("discrete mdp: transition row does not sum to 1");
    }
    for (double r : rewards)
        if (std::abs(r) > 1.0) throw std::invalid_argument("discrete mdp: reward out of [-1, 1]");
}

namespace {

// Gaussian elimination with partial pivoting; a is n x n row-major.
std::vector<double> solve_linear(std::vector<double> a, std::vector<double> b) {
    const int n = static_cast<int>(b.size());
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r)
            if (std::abs(a[r * n + col]) > std::abs(a[piv * n + col])) piv = r;
        if (piv != col) {
            for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[piv * n + c]);
            std::swap(b[col], b[piv]);
        }
        const double d = a[col * n + col];
        if (d == 0.0) throw std::runtime_error("discrete mdp: singular stationary system");
        for (int r = col + 1; r < n; ++r) {
            const double f = a[r * n + col] / d;
            if (f == 0.0) continue;
            for (int c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
            b[r] -= f * b[col];
        }
    }
    std::vector<double> x(n);
    for (int r = n - 1; r >= 0; --r) {
        double acc = b[r];
        for (int c = r + 1; c < n; ++c) acc -= a[r * n + c] * x[c];
        x[r] = acc / a[r * n + r];
    }
    return x;
}

}  // namespace

std::vector<double> DiscreteTestMDP::stationary_distribution() const {
    // pi (P_b - I) = 0 with sum(pi) = 1, where
    // P_b[(s,a) -> (s',a')] = P(s'|s,a) / num_actions.
    const int m = num_pairs();
    const double pa = 1.0 / static_cast<double>(num_actions);
    std::vector<double> a(static_cast<std::size_t>(m) * m, 0.0);
    std::vector<double> b(m, 0.0);
    // rows 0..m-2: columns of pi^T (P_b - I); last row replaced by the
    // normalization constraint.
    for (int col = 0; col < m; ++col) {
        const int sp = col / num_actions;
        for (int row = 0; row < m; ++row) {
            const int s = row / num_actions, act = row % num_actions;
            double v = transition[s * num_actions + act][sp] * pa;
            if (row == col) v -= 1.0;
            if (col < m - 1) a[col * m + row] = v;
        }
    }
    for (int row = 0; row < m; ++row) a[(m - 1) * m + row] = 1.0;
    b[m - 1] = 1.0;
    return solve_linear(std::move(a), std::move(b));
}

DiscreteTestMDP DiscreteTestMDP::default_instance() {
    DiscreteTestMDP mdp;
    mdp.states = {0.0, 0.5, 1.0};
    mdp.num_actions = 2;
    mdp.transition = {
        {0.6, 0.3, 0.1},  // s0, a0
        {0.2, 0.5, 0.3},  // s0, a1
        {0.3, 0.4, 0.3},  // s1, a0
        {0.1, 0.6, 0.3},  // s1, a1
        {0.2, 0.3, 0.5},  // s2, a0
        {0.4, 0.4, 0.2},  // s2, a1
    };
    mdp.rewards = {0.9, -0.2, 0.1, 0.4, -0.5, 0.8};
    mdp.validate();
    return mdp;
}

Transition discrete_mdp_step(const DiscreteTestMDP& mdp, int state_index, int action_index,
                             Rng& rng) {
    if (state_index < 0 || state_index >= mdp.num_states() || action_index < 0 ||
        action_index >= mdp.num_actions)
        throw std::invalid_argument("discrete mdp: invalid state or action index");
    const auto& row = mdp.transition[state_index * mdp.num_actions + action_index];
    const double u = rng.uniform01();
    double acc = 0.0;
    int next = mdp.num_states() - 1;
    for (int s = 0; s < mdp.num_states(); ++s) {
        acc += row[s];
        if (u < acc) {
            next = s;
            break;
        }
    }
    Transition tr;
    tr.reward = mdp.rewards[state_index * mdp.num_actions + action_index];
    tr.next_state = {mdp.states[next]};
    tr.next_action.index = uniform_behavior_policy(mdp.num_actions, rng);
    return tr;
}

DiscreteMdpEnv::DiscreteMdpEnv(DiscreteTestMDP mdp) : mdp_(std::move(mdp)) {
    mdp_.validate();
    actions_.resize(mdp_.num_actions);
    for (int i = 0; i < mdp_.num_actions; ++i) actions_[i].index = i;
}

Box DiscreteMdpEnv::state_box() const {
    const auto [mn, mx] = std::minmax_element(mdp_.states.begin(), mdp_.states.end());
    return Box{{*mn}, {*mx}};
}

int DiscreteMdpEnv::state_index_of(double embedded) const {
    for (int s = 0; s < mdp_.num_states(); ++s)
        if (mdp_.states[s] == embedded) return s;
    throw std::invalid_argument("discrete mdp: state is not an embedded point");
}

Transition DiscreteMdpEnv::step(std::span<const double> state, const Action& a, Rng& rng) const {
    return discrete_mdp_step(mdp_, state_index_of(state[0]), a.index, rng);
}

KernelConfig DiscreteMdpEnv::make_kernel(double sigma) const {
    const double sd = state_box().diagonal();
    return KernelConfig::finite_actions(sigma, 1, std::sqrt(sd * sd + 1.0));
}

}  // namespace qm
