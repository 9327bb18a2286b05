#include "qmeasure/env.hpp"

#include <cmath>
#include <stdexcept>

namespace qm {

double Box::diagonal() const {
    double d2 = 0.0;
    for (int i = 0; i < dim(); ++i) {
        const double t = hi[i] - lo[i];
        d2 += t * t;
    }
    return std::sqrt(d2);
}

int uniform_behavior_policy(int num_actions, Rng& rng) {
    if (num_actions < 1) throw std::invalid_argument("uniform_behavior_policy: empty action set");
    return rng.uniform_int(num_actions);
}

Action Env::sample_behavior_action(Rng& rng) const {
    const auto& actions = action_set();
    return actions[static_cast<std::size_t>(
        uniform_behavior_policy(static_cast<int>(actions.size()), rng))];
}

}  // namespace qm
