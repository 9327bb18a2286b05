#include "qmeasure/learner.hpp"

#include <chrono>
#include <cmath>
#include <stdexcept>

namespace qm {

double clip(double x, double gamma) {
    const double bound = 1.0 / (1.0 - gamma);
    return std::max(std::min(x, bound), -bound);
}

LearnerState LearnerState::init(const KernelConfig& cfg, double gamma, const StepSchedule& alpha,
                                const StateAction& z0) {
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("learner: gamma must lie in (0, 1)");
    LearnerState ls;
    ls.kernel_cfg = cfg;
    ls.gamma = gamma;
    ls.alpha_schedule = alpha;
    ls.beta_schedule = StepSchedule::beta_uniform();
    ls.last_point = flatten(cfg, z0);
    ls.mu = WeightedMeasure::point_mass(cfg.point_dim(), ls.last_point.data(), 1.0, true);
    ls.nu = WeightedMeasure::zero(cfg.point_dim());
    return ls;
}

namespace {

void fill_point(const KernelConfig& cfg, std::span<const double> state, const Action& a,
                std::vector<double>& out) {
    out.resize(cfg.point_dim());
    for (int i = 0; i < cfg.state_dim; ++i) out[i] = state[i];
    if (cfg.mode == ActionMode::ContinuousBox) {
        for (int i = 0; i < cfg.action_dim; ++i) out[cfg.state_dim + i] = a.coords[i];
    } else {
        out[cfg.state_dim] = static_cast<double>(a.index);
    }
}

}  // namespace

std::pair<int, double> greedy_finite(std::span<const double> state,
                                     const std::vector<Action>& actions,
                                     const LearnerState& ls) {
    if (actions.empty()) throw std::invalid_argument("greedy_finite: empty action set");
    std::vector<double> pt;
    int best_index = 0;
    double best_value = 0.0;
    for (std::size_t i = 0; i < actions.size(); ++i) {
        fill_point(ls.kernel_cfg, state, actions[i], pt);
        const double v = clip(ls.q_at(pt.data()), ls.gamma);
        if (i == 0 || v > best_value) {
            best_index = static_cast<int>(i);
            best_value = v;
        }
    }
    return {best_index, best_value};
}

std::pair<std::vector<double>, double> greedy_continuous(std::span<const double> state,
                                                         const Box& action_box,
                                                         const LearnerState& ls, int steps,
                                                         int restarts, double eta, Rng& rng) {
    const KernelConfig& cfg = ls.kernel_cfg;
    if (cfg.mode != ActionMode::ContinuousBox)
        throw std::invalid_argument("greedy_continuous: kernel is not in ContinuousBox mode");
    const int da = cfg.action_dim;
    if (action_box.dim() != da)
        throw std::invalid_argument("greedy_continuous: action box dimension mismatch");
    if (steps < 0 || restarts < 1 || !(eta > 0.0))
        throw std::invalid_argument("greedy_continuous: need steps >= 0, restarts >= 1, eta > 0");

    const double inv_sigma2 = 1.0 / (cfg.sigma * cfg.sigma);
    const double inv_two_sigma2 = 0.5 * inv_sigma2;
    const int dim = cfg.point_dim();
    const std::size_t n_nu = ls.nu.size();
    const double scale_ratio = ls.nu.global_scale() / ls.mu.global_scale();

    std::vector<double> z(dim);
    for (int i = 0; i < cfg.state_dim; ++i) z[i] = state[i];
    double* a = z.data() + cfg.state_dim;

    // q(a) and its action gradient from one pass over each support:
    // grad q = (sum_k W_k kappa_k (a_k - a) - q sum_k u_k kappa_k (a_k - a))
    //          / (sigma^2 sum_k u_k kappa_k).
    std::vector<double> grad_num(da), grad_den(da);
    auto accumulate = [&](const WeightedMeasure& m, double* grad, double* sum) {
        const double* pts = m.support_flat().data();
        const double* w = m.base_weights().data();
        for (std::size_t k = 0; k < m.size(); ++k) {
            const double* u = pts + k * dim;
            const double kv = std::exp(-squared_distance(cfg, z.data(), u) * inv_two_sigma2);
            const double wk = w[k] * kv;
            *sum += wk;
            for (int j = 0; j < da; ++j) grad[j] += wk * (u[cfg.state_dim + j] - a[j]);
        }
        add_kernel_evals(m.size());
    };
    auto eval_with_gradient = [&](double* grad_out) {
        double num = 0.0, den = 0.0;
        for (int j = 0; j < da; ++j) grad_num[j] = grad_den[j] = 0.0;
        accumulate(ls.mu, grad_den.data(), &den);
        if (n_nu > 0) accumulate(ls.nu, grad_num.data(), &num);
        const double q = n_nu == 0 ? 0.0 : scale_ratio * num / den;
        if (grad_out) {
            for (int j = 0; j < da; ++j)
                grad_out[j] = (scale_ratio * grad_num[j] - q * grad_den[j]) * inv_sigma2 / den;
        }
        return q;
    };

    std::vector<double> best_action(da);
    double best_value = 0.0;
    bool have_best = false;
    std::vector<double> grad(da);
    for (int r = 0; r < restarts; ++r) {
        for (int j = 0; j < da; ++j) a[j] = rng.uniform(action_box.lo[j], action_box.hi[j]);
        for (int step = 0; step <= steps; ++step) {
            const double q = eval_with_gradient(step < steps ? grad.data() : nullptr);
            const double v = clip(q, ls.gamma);
            if (!have_best || v > best_value) {
                best_value = v;
                best_action.assign(a, a + da);
                have_best = true;
            }
            if (step == steps) break;
            for (int j = 0; j < da; ++j) {
                a[j] += eta * grad[j];
                a[j] = std::max(action_box.lo[j], std::min(action_box.hi[j], a[j]));
            }
        }
    }
    return {best_action, best_value};
}

double td_target(double reward, std::span<const double> next_state,
                 const std::vector<Action>& finite_actions, const LearnerState& ls) {
    const double value = greedy_finite(next_state, finite_actions, ls).second;
    return reward + ls.gamma * value;
}

namespace {

TDRecord finish_step(LearnerState& ls, const Transition& tr, double y, double greedy_value,
                     std::chrono::steady_clock::time_point t0) {
    const std::uint64_t n1 = ls.iteration + 1;
    nu_update(ls.nu, ls.last_point.data(), y, ls.alpha_schedule.at(n1));

    std::vector<double> z_next(ls.kernel_cfg.point_dim());
    fill_point(ls.kernel_cfg, tr.next_state, tr.next_action, z_next);
    mu_update(ls.mu, z_next.data(), ls.beta_schedule.at(n1));

    ls.iteration = n1;
    ls.last_point = std::move(z_next);

    TDRecord rec;
    rec.iteration = n1;
    rec.reward = tr.reward;
    rec.target_y = y;
    rec.greedy_value = greedy_value;
    rec.step_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

}  // namespace

TDRecord train_step(LearnerState& ls, const Transition& tr,
                    const std::vector<Action>& finite_actions) {
    const auto t0 = std::chrono::steady_clock::now();
    const double greedy_value = greedy_finite(tr.next_state, finite_actions, ls).second;
    const double y = tr.reward + ls.gamma * greedy_value;
    return finish_step(ls, tr, y, greedy_value, t0);
}

TDRecord train_step_continuous(LearnerState& ls, const Transition& tr, const Box& action_box) {
    const auto t0 = std::chrono::steady_clock::now();
    const double eta =
        ls.argmax_eta > 0.0 ? ls.argmax_eta : 0.1 * action_box.diagonal();
    const double greedy_value =
        greedy_continuous(tr.next_state, action_box, ls, ls.argmax_steps, ls.argmax_restarts,
                          eta, ls.argmax_rng)
            .second;
    const double y = tr.reward + ls.gamma * greedy_value;
    return finish_step(ls, tr, y, greedy_value, t0);
}

}  // namespace qm
