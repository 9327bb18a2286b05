#pragma once

#include <vector>

#include "qmeasure/kernel.hpp"
#include "qmeasure/measure.hpp"

namespace qm {

// Grid approximation of the kernel mean distance
//   d(a, b) = sup_z | integral kappa(z, .) d(a - b) |,
// the sup taken over the supplied evaluation grid.
double kernel_mean_distance(const KernelConfig& cfg, const WeightedMeasure& a,
                            const WeightedMeasure& b,
                            const std::vector<StateAction>& eval_grid);

// Grid approximation of the stationary-normalized distance
//   D_mu(a, b) = sup_z | integral kappa(z, .) d(a - b) / integral kappa(z, .) dmu |.
// mu_ref must be a probability measure (weights sum to 1 within 1e-9).
double stationary_normalized_distance(const KernelConfig& cfg, const WeightedMeasure& a,
                                      const WeightedMeasure& b, const WeightedMeasure& mu_ref,
                                      const std::vector<StateAction>& eval_grid);

}  // namespace qm
