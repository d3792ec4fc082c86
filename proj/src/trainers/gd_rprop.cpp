#include <cmath>

#include "minimize_impl.hpp"

namespace tsens {

void gd_momentum_step(std::span<double> params, std::span<const double> grad,
                      std::span<double> delta, double eta, double alpha) {
    if (!(eta > 0.0)) throw TsError("gd_momentum_step: learning rate must be > 0");
    if (!(alpha >= 0.0 && alpha < 1.0)) throw TsError("gd_momentum_step: momentum must be in [0, 1)");
    if (params.size() != grad.size() || params.size() != delta.size())
        throw TsError("gd_momentum_step: dimension mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
        delta[i] = -eta * grad[i] + alpha * delta[i];
        params[i] += delta[i];
    }
}

} // namespace tsens

namespace tsens::detail {

MinimizeResult run_gd_momentum(const TrainerSpec& spec, const Objective& obj,
                               std::vector<double> w, const IterationObserver& observer) {
    const int D = obj.dim();
    std::vector<double> grad(D), delta(D, 0.0);

    double loss = obj.loss_grad(w, grad);
    Loop loop(spec, w, loss, observer);
    while (!loop.stopped()) {
        gd_momentum_step(w, grad, delta, spec.hyper.learning_rate, spec.hyper.momentum);
        loss = obj.loss_grad(w, grad);
        if (!loop.epoch_done(w, loss)) break;
    }
    return std::move(loop).result();
}

// Sign-based adaptive steps with weight backtracking: on a sign flip the
// parameter's previous update is reverted, its step shrinks, and its
// derivative memory is cleared so the next epoch treats it as fresh.
// Derivative magnitudes never enter the update.
MinimizeResult run_rprop(const TrainerSpec& spec, const Objective& obj, std::vector<double> w,
                         const IterationObserver& observer) {
    const int D = obj.dim();
    const auto& hp = spec.hyper;
    std::vector<double> grad(D), step(D, hp.rprop_delta0), prev_grad(D, 0.0), prev_dw(D, 0.0);

    double loss = obj.loss_grad(w, grad);
    Loop loop(spec, w, loss, observer);
    while (!loop.stopped()) {
        for (int i = 0; i < D; ++i) {
            const double sign_product = prev_grad[i] * grad[i];
            if (sign_product > 0.0) {
                step[i] = std::min(step[i] * hp.rprop_eta_plus, hp.rprop_delta_max);
                const double dw = grad[i] > 0.0 ? -step[i] : step[i];
                w[i] += dw;
                prev_dw[i] = dw;
                prev_grad[i] = grad[i];
            } else if (sign_product < 0.0) {
                step[i] = std::max(step[i] * hp.rprop_eta_minus, hp.rprop_delta_min);
                w[i] -= prev_dw[i];
                prev_dw[i] = 0.0;
                prev_grad[i] = 0.0;
            } else {
                const double dw = grad[i] > 0.0 ? -step[i] : (grad[i] < 0.0 ? step[i] : 0.0);
                w[i] += dw;
                prev_dw[i] = dw;
                prev_grad[i] = grad[i];
            }
        }
        loss = obj.loss_grad(w, grad);
        if (!loop.epoch_done(w, loss)) break;
    }
    return std::move(loop).result();
}

} // namespace tsens::detail
