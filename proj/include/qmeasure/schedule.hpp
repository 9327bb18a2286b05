#pragma once

#include <cstdint>
#include <stdexcept>

namespace qm {

// Stepsize schedules, indexed from n = 1.
//   AlphaRM:     alpha_n = a / (n + b), Robbins-Monro for a > 0, b >= 1
//                (non-increasing, square-summable, non-summable).
//   BetaUniform: beta_n = 1 / (n + 1), which makes the reference measure
//                the running empirical measure.
struct StepSchedule {
    enum class Kind { AlphaRM, BetaUniform };

    Kind kind = Kind::AlphaRM;
    double a = 1.0;
    double b = 1.0;

    static StepSchedule alpha_rm(double a, double b) {
        if (!(a > 0.0) || !(b > 0.0))
            throw std::invalid_argument("StepSchedule: a and b must be positive");
        return {Kind::AlphaRM, a, b};
    }
    static StepSchedule beta_uniform() { return {Kind::BetaUniform, 1.0, 1.0}; }

    double at(std::uint64_t n) const {
        if (kind == Kind::BetaUniform) return 1.0 / static_cast<double>(n + 1);
        return a / (static_cast<double>(n) + b);
    }
};

}  // namespace qm
