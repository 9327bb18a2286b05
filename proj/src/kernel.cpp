#include "qmeasure/kernel.hpp"

#include <atomic>
#include <cmath>
#include <stdexcept>

namespace qm {

namespace {
std::atomic<std::uint64_t> g_kernel_evals{0};

void validate_common(double sigma, int state_dim, double diameter) {
    if (!(sigma > 0.0)) throw std::invalid_argument("kernel: sigma must be positive");
    if (state_dim < 1) throw std::invalid_argument("kernel: state_dim must be positive");
    if (!(diameter >= 0.0)) throw std::invalid_argument("kernel: diameter must be nonnegative");
}
}  // namespace

KernelConfig KernelConfig::continuous_box(double sigma, int state_dim, int action_dim,
                                          double diameter) {
    validate_common(sigma, state_dim, diameter);
    if (action_dim < 1)
        throw std::invalid_argument("kernel: action_dim must be positive in ContinuousBox mode");
    KernelConfig cfg;
    cfg.sigma = sigma;
    cfg.mode = ActionMode::ContinuousBox;
    cfg.state_dim = state_dim;
    cfg.action_dim = action_dim;
    cfg.diameter = diameter;
    cfg.kappa_min = std::exp(-diameter * diameter / (2.0 * sigma * sigma));
    return cfg;
}

KernelConfig KernelConfig::finite_actions(double sigma, int state_dim, double diameter) {
    validate_common(sigma, state_dim, diameter);
    KernelConfig cfg;
    cfg.sigma = sigma;
    cfg.mode = ActionMode::FiniteActions;
    cfg.state_dim = state_dim;
    cfg.action_dim = 0;
    cfg.diameter = diameter;
    cfg.kappa_min = std::exp(-diameter * diameter / (2.0 * sigma * sigma));
    return cfg;
}

void flatten(const KernelConfig& cfg, const StateAction& z, double* out) {
    if (static_cast<int>(z.state.size()) != cfg.state_dim)
        throw std::invalid_argument("kernel: state dimension mismatch");
    for (int i = 0; i < cfg.state_dim; ++i) out[i] = z.state[i];
    if (cfg.mode == ActionMode::ContinuousBox) {
        if (static_cast<int>(z.action.size()) != cfg.action_dim)
            throw std::invalid_argument("kernel: action dimension mismatch");
        for (int i = 0; i < cfg.action_dim; ++i) out[cfg.state_dim + i] = z.action[i];
    } else {
        if (z.action_index < 0)
            throw std::invalid_argument("kernel: action index must be nonnegative");
        out[cfg.state_dim] = static_cast<double>(z.action_index);
    }
}

std::vector<double> flatten(const KernelConfig& cfg, const StateAction& z) {
    std::vector<double> out(cfg.point_dim());
    flatten(cfg, z, out.data());
    return out;
}

double squared_distance(const KernelConfig& cfg, const double* z, const double* u) {
    double d2 = 0.0;
    for (int i = 0; i < cfg.state_dim; ++i) {
        const double t = z[i] - u[i];
        d2 += t * t;
    }
    if (cfg.mode == ActionMode::ContinuousBox) {
        for (int i = cfg.state_dim; i < cfg.state_dim + cfg.action_dim; ++i) {
            const double t = z[i] - u[i];
            d2 += t * t;
        }
    } else {
        if (z[cfg.state_dim] != u[cfg.state_dim]) d2 += 1.0;
    }
    return d2;
}

double eval_kernel(const KernelConfig& cfg, const double* z, const double* u) {
    g_kernel_evals.fetch_add(1, std::memory_order_relaxed);
    const double inv_two_sigma2 = 1.0 / (2.0 * cfg.sigma * cfg.sigma);
    return std::exp(-squared_distance(cfg, z, u) * inv_two_sigma2);
}

double eval_kernel(const KernelConfig& cfg, const StateAction& z, const StateAction& u) {
    const auto zf = flatten(cfg, z);
    const auto uf = flatten(cfg, u);
    return eval_kernel(cfg, zf.data(), uf.data());
}

double kernel_lower_bound(const KernelConfig& cfg) { return cfg.kappa_min; }

std::uint64_t kernel_eval_count() { return g_kernel_evals.load(std::memory_order_relaxed); }
void reset_kernel_eval_count() { g_kernel_evals.store(0, std::memory_order_relaxed); }
void add_kernel_evals(std::uint64_t n) { g_kernel_evals.fetch_add(n, std::memory_order_relaxed); }

}  // namespace qm
