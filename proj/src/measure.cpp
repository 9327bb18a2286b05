#include "qmeasure/measure.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>

namespace qm {

namespace {
constexpr double kScaleRenormThreshold = 1e-150;

void write_raw(std::ostream& os, const void* p, std::size_t n) {
    os.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}
void read_raw(std::istream& is, void* p, std::size_t n) {
    is.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is) throw std::runtime_error("measure: truncated checkpoint");
}
}  // namespace

WeightedMeasure WeightedMeasure::point_mass(int point_dim, const double* pt, double weight,
                                            bool is_probability) {
    WeightedMeasure m(point_dim, is_probability);
    m.append(pt, weight);
    return m;
}

double WeightedMeasure::min_effective_weight() const {
    if (empty()) return 0.0;
    return global_scale_ * base_min_;
}

void WeightedMeasure::append(const double* pt, double effective_weight) {
    support_.insert(support_.end(), pt, pt + point_dim_);
    const double base = effective_weight / global_scale_;
    base_weights_.push_back(base);
    base_sum_ += base;
    base_min_ = (base_weights_.size() == 1) ? base : std::min(base_min_, base);
}

void WeightedMeasure::scale_all(double factor) { global_scale_ *= factor; }

void WeightedMeasure::clear_to_zero() {
    support_.clear();
    base_weights_.clear();
    global_scale_ = 1.0;
    base_sum_ = 0.0;
    base_min_ = 0.0;
}

void renormalize_scale(WeightedMeasure& m) {
    if (m.global_scale_ == 1.0) return;
    const double s = m.global_scale_;
    double sum = 0.0;
    double mn = std::numeric_limits<double>::infinity();
    for (double& w : m.base_weights_) {
        w *= s;
        sum += w;
        mn = std::min(mn, w);
    }
    m.global_scale_ = 1.0;
    m.base_sum_ = sum;
    m.base_min_ = m.base_weights_.empty() ? 0.0 : mn;
}

void mu_update(WeightedMeasure& mu, const double* z_new, double beta) {
    if (!(beta > 0.0 && beta <= 1.0))
        throw std::invalid_argument("mu_update: beta must lie in (0, 1]");
    if (!mu.is_probability())
        throw std::invalid_argument("mu_update: measure is not flagged as a probability");
    if (beta == 1.0) {
        mu.clear_to_zero();
        mu.append(z_new, 1.0);
        return;
    }
    mu.scale_all(1.0 - beta);
    mu.append(z_new, beta);
    if (mu.global_scale() < kScaleRenormThreshold) renormalize_scale(mu);
}

void nu_update(WeightedMeasure& nu, const double* z_prev, double y, double alpha) {
    if (!(alpha > 0.0 && alpha <= 1.0))
        throw std::invalid_argument("nu_update: alpha must lie in (0, 1]");
    if (alpha == 1.0) {
        nu.clear_to_zero();
        nu.append(z_prev, y);
        return;
    }
    nu.scale_all(1.0 - alpha);
    nu.append(z_prev, alpha * y);
    if (nu.global_scale() < kScaleRenormThreshold) renormalize_scale(nu);
}

double total_variation(const WeightedMeasure& m) {
    double acc = 0.0;
    for (double w : m.base_weights()) acc += std::abs(w);
    return m.global_scale() * acc;
}

double kernel_weighted_sum(const KernelConfig& cfg, const WeightedMeasure& m, const double* z) {
    const int dim = cfg.point_dim();
    const double inv_two_sigma2 = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
    const double* pts = m.support_flat().data();
    const double* w = m.base_weights().data();
    const std::size_t n = m.size();
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const double d2 = squared_distance(cfg, z, pts + k * dim);
        acc += w[k] * std::exp(-d2 * inv_two_sigma2);
    }
    add_kernel_evals(n);
    return m.global_scale() * acc;
}

double reconstruct_q(const KernelConfig& cfg, const WeightedMeasure& nu,
                     const WeightedMeasure& mu, const double* z) {
    if (mu.empty()) throw std::invalid_argument("reconstruct_q: mu has empty support");
    const double den = kernel_weighted_sum(cfg, mu, z);
    if (nu.empty()) return 0.0;
    const double num = kernel_weighted_sum(cfg, nu, z);
    return num / den;
}

double reconstruct_q(const KernelConfig& cfg, const WeightedMeasure& nu,
                     const WeightedMeasure& mu, const StateAction& z) {
    const auto zf = flatten(cfg, z);
    return reconstruct_q(cfg, nu, mu, zf.data());
}

double reconstruct_q_shared(const KernelConfig& cfg, const WeightedMeasure& nu,
                            const WeightedMeasure& mu, const double* z) {
    if (mu.empty()) throw std::invalid_argument("reconstruct_q: mu has empty support");
    if (nu.size() > mu.size())
        throw std::invalid_argument("reconstruct_q_shared: nu support exceeds mu support");
    const int dim = cfg.point_dim();
    // Guard against callers that do not use the shared trajectory layout:
    // the first and last nu atoms must sit on mu's corresponding points.
    if (!nu.empty()) {
        for (std::size_t k : {std::size_t{0}, nu.size() - 1}) {
            for (int d = 0; d < dim; ++d)
                if (nu.point(k)[d] != mu.point(k)[d])
                    throw std::invalid_argument(
                        "reconstruct_q_shared: nu support is not a prefix of mu support");
        }
    }
    const double inv_two_sigma2 = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
    const double* pts = mu.support_flat().data();
    const double* wmu = mu.base_weights().data();
    const double* wnu = nu.base_weights().data();
    const std::size_t n_nu = nu.size();
    const std::size_t n_mu = mu.size();
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < n_nu; ++k) {
        const double d2 = squared_distance(cfg, z, pts + k * dim);
        const double kv = std::exp(-d2 * inv_two_sigma2);
        num += wnu[k] * kv;
        den += wmu[k] * kv;
    }
    for (std::size_t k = n_nu; k < n_mu; ++k) {
        const double d2 = squared_distance(cfg, z, pts + k * dim);
        den += wmu[k] * std::exp(-d2 * inv_two_sigma2);
    }
    add_kernel_evals(n_mu);
    if (n_nu == 0) return 0.0;
    return (nu.global_scale() * num) / (mu.global_scale() * den);
}

WeightedMeasure scaled_by_values(const WeightedMeasure& mu, const std::vector<double>& values) {
    if (values.size() != mu.size())
        throw std::invalid_argument("scaled_by_values: size mismatch");
    WeightedMeasure out(mu.point_dim(), false);
    for (std::size_t k = 0; k < mu.size(); ++k)
        out.append(mu.point(k), values[k] * mu.effective_weight(k));
    return out;
}

namespace {
constexpr std::uint32_t kMeasureMagic = 0x514d574d;  // "QMWM"
constexpr std::uint32_t kMeasureVersion = 1;
}  // namespace

void save_measure(const WeightedMeasure& m, std::uint64_t iteration, std::ostream& os) {
    write_raw(os, &kMeasureMagic, sizeof kMeasureMagic);
    write_raw(os, &kMeasureVersion, sizeof kMeasureVersion);
    const std::uint32_t dim = static_cast<std::uint32_t>(m.point_dim_);
    const std::uint8_t prob = m.is_probability_ ? 1 : 0;
    const std::uint64_t count = m.base_weights_.size();
    write_raw(os, &dim, sizeof dim);
    write_raw(os, &prob, sizeof prob);
    write_raw(os, &count, sizeof count);
    write_raw(os, &m.global_scale_, sizeof m.global_scale_);
    write_raw(os, &iteration, sizeof iteration);
    write_raw(os, m.support_.data(), m.support_.size() * sizeof(double));
    write_raw(os, m.base_weights_.data(), m.base_weights_.size() * sizeof(double));
}

WeightedMeasure load_measure(std::istream& is, std::uint64_t& iteration) {
    std::uint32_t magic = 0, version = 0, dim = 0;
    std::uint8_t prob = 0;
    std::uint64_t count = 0;
    read_raw(is, &magic, sizeof magic);
    read_raw(is, &version, sizeof version);
    if (magic != kMeasureMagic || version != kMeasureVersion)
        throw std::runtime_error("measure: unrecognized checkpoint header");
    read_raw(is, &dim, sizeof dim);
    read_raw(is, &prob, sizeof prob);
    read_raw(is, &count, sizeof count);
    WeightedMeasure m(static_cast<int>(dim), prob != 0);
    read_raw(is, &m.global_scale_, sizeof m.global_scale_);
    read_raw(is, &iteration, sizeof iteration);
    m.support_.resize(count * dim);
    m.base_weights_.resize(count);
    read_raw(is, m.support_.data(), m.support_.size() * sizeof(double));
    read_raw(is, m.base_weights_.data(), m.base_weights_.size() * sizeof(double));
    double sum = 0.0;
    double mn = std::numeric_limits<double>::infinity();
    for (double w : m.base_weights_) {
        sum += w;
        mn = std::min(mn, w);
    }
    m.base_sum_ = sum;
    m.base_min_ = m.base_weights_.empty() ? 0.0 : mn;
    return m;
}

}  // namespace qm
