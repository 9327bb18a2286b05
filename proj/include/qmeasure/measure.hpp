#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

#include "qmeasure/kernel.hpp"

namespace qm {

// Weighted point measure sum_k w_k delta_{u_k} with w_k = global_scale *
// base_weights[k]. The scale factor turns the per-step "multiply every
// weight" rescale into one multiplication; appends store base = w / scale.
// Support points are stored flat with stride point_dim.
class WeightedMeasure {
  public:
    WeightedMeasure() = default;
    explicit WeightedMeasure(int point_dim, bool is_probability = false)
        : point_dim_(point_dim), is_probability_(is_probability) {}

    static WeightedMeasure zero(int point_dim) { return WeightedMeasure(point_dim, false); }
    static WeightedMeasure point_mass(int point_dim, const double* pt, double weight,
                                      bool is_probability);

    int point_dim() const { return point_dim_; }
    std::size_t size() const { return base_weights_.size(); }
    bool empty() const { return base_weights_.empty(); }
    bool is_probability() const { return is_probability_; }
    double global_scale() const { return global_scale_; }

    const double* point(std::size_t k) const { return support_.data() + k * point_dim_; }
    const std::vector<double>& support_flat() const { return support_; }
    const std::vector<double>& base_weights() const { return base_weights_; }
    double base_weight(std::size_t k) const { return base_weights_[k]; }
    double effective_weight(std::size_t k) const { return global_scale_ * base_weights_[k]; }

    // Incrementally tracked; scale multiplication leaves both unchanged up
    // to the final product.
    double effective_sum() const { return global_scale_ * base_sum_; }
    double min_effective_weight() const;

    void append(const double* pt, double effective_weight);
    void scale_all(double factor);  // multiplies every effective weight
    void clear_to_zero();

    friend void renormalize_scale(WeightedMeasure& m);
    friend void save_measure(const WeightedMeasure& m, std::uint64_t iteration, std::ostream& os);
    friend WeightedMeasure load_measure(std::istream& is, std::uint64_t& iteration);

  private:
    int point_dim_ = 0;
    std::vector<double> support_;
    std::vector<double> base_weights_;
    double global_scale_ = 1.0;
    bool is_probability_ = false;
    double base_sum_ = 0.0;
    double base_min_ = 0.0;
};

// mu <- (1 - beta) mu + beta delta_{z_new}; mu stays a probability measure.
void mu_update(WeightedMeasure& mu, const double* z_new, double beta);

// nu <- (1 - alpha) nu + alpha y delta_{z_prev}.
void nu_update(WeightedMeasure& nu, const double* z_prev, double y, double alpha);

// Folds global_scale into base weights. Invoked automatically by the
// updates once the scale drops below 1e-150.
void renormalize_scale(WeightedMeasure& m);

// Sum of absolute effective weights; an upper bound proxy for the total
// variation norm (coincident atoms of opposite sign may cancel).
double total_variation(const WeightedMeasure& m);

// sum_k w_k kappa(z, u_k), accumulated in support order.
double kernel_weighted_sum(const KernelConfig& cfg, const WeightedMeasure& m, const double* z);

// q(z) = (sum_k W_k kappa(z, nu_k)) / (sum_k u_k kappa(z, mu_k)).
double reconstruct_q(const KernelConfig& cfg, const WeightedMeasure& nu,
                     const WeightedMeasure& mu, const double* z);
double reconstruct_q(const KernelConfig& cfg, const WeightedMeasure& nu,
                     const WeightedMeasure& mu, const StateAction& z);

// Same value as reconstruct_q, bit for bit, for the training-loop layout
// where nu's support is a prefix of mu's support (nu weight k sits on the
// same point as mu weight k). Evaluates the kernel once per shared point.
double reconstruct_q_shared(const KernelConfig& cfg, const WeightedMeasure& nu,
                            const WeightedMeasure& mu, const double* z);

// nu with weights values[k] * mu_weight[k] on mu's support; reconstruct_q
// of this against mu is the Nadaraya-Watson smoothing of `values`.
WeightedMeasure scaled_by_values(const WeightedMeasure& mu, const std::vector<double>& values);

// Binary checkpoint of one measure (version tag, layout, support matrix,
// base weights, global scale, iteration counter). Base weights round-trip
// bit-exactly.
void save_measure(const WeightedMeasure& m, std::uint64_t iteration, std::ostream& os);
WeightedMeasure load_measure(std::istream& is, std::uint64_t& iteration);

}  // namespace qm
