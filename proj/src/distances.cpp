#include "qmeasure/distances.hpp"

#include <cmath>
#include <stdexcept>

namespace qm {

double kernel_mean_distance(const KernelConfig& cfg, const WeightedMeasure& a,
                            const WeightedMeasure& b,
                            const std::vector<StateAction>& eval_grid) {
    if (eval_grid.empty())
        throw std::invalid_argument("kernel_mean_distance: evaluation grid is empty");
    double best = 0.0;
    std::vector<double> z(cfg.point_dim());
    for (const StateAction& g : eval_grid) {
        flatten(cfg, g, z.data());
        const double diff =
            std::abs(kernel_weighted_sum(cfg, a, z.data()) - kernel_weighted_sum(cfg, b, z.data()));
        best = std::max(best, diff);
    }
    return best;
}

double stationary_normalized_distance(const KernelConfig& cfg, const WeightedMeasure& a,
                                      const WeightedMeasure& b, const WeightedMeasure& mu_ref,
                                      const std::vector<StateAction>& eval_grid) {
    if (eval_grid.empty())
        throw std::invalid_argument("stationary_normalized_distance: evaluation grid is empty");
    if (!mu_ref.is_probability() || std::abs(mu_ref.effective_sum() - 1.0) > 1e-9)
        throw std::invalid_argument("stationary_normalized_distance: mu_ref is not normalized");
    double best = 0.0;
    std::vector<double> z(cfg.point_dim());
    for (const StateAction& g : eval_grid) {
        flatten(cfg, g, z.data());
        const double num =
            std::abs(kernel_weighted_sum(cfg, a, z.data()) - kernel_weighted_sum(cfg, b, z.data()));
        const double den = kernel_weighted_sum(cfg, mu_ref, z.data());
        best = std::max(best, num / den);
    }
    return best;
}

}  // namespace qm
