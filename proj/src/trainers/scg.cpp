#include <cmath>

#include "minimize_impl.hpp"

// Moller's scaled conjugate gradient: conjugate directions with the
// Hessian-vector product approximated by a finite difference of gradients and
// a Levenberg-style lambda that keeps the curvature estimate positive.

namespace tsens::detail {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

} // namespace

MinimizeResult run_scg(const TrainerSpec& spec, const Objective& obj, std::vector<double> w,
                       const IterationObserver& observer) {
    const int D = obj.dim();
    const double sigma = spec.hyper.scg_sigma;

    std::vector<double> grad(D), r(D), p(D), r_new(D), grad_shift(D), s(D), trial(D);

    double loss = obj.loss_grad(w, grad);
    for (int i = 0; i < D; ++i) r[i] = -grad[i];
    p = r;

    Loop loop(spec, w, loss, observer);
    double lambda = spec.hyper.scg_lambda0;
    double lambda_bar = 0.0;
    bool success = true;
    double raw_delta = 0.0; // p^T s from the last second-order evaluation
    int k = 0;

    while (!loop.stopped()) {
        ++k;
        const double p_norm2 = dot(p, p);
        if (p_norm2 == 0.0 || dot(r, r) == 0.0) {
            loop.converged();
            break;
        }

        if (success) {
            const double sigma_k = sigma / std::sqrt(p_norm2);
            for (int i = 0; i < D; ++i) trial[i] = w[i] + sigma_k * p[i];
            obj.loss_grad(trial, grad_shift);
            for (int i = 0; i < D; ++i) s[i] = (grad_shift[i] - grad[i]) / sigma_k;
            raw_delta = dot(p, s);
        }

        double delta = raw_delta + (lambda - lambda_bar) * p_norm2;
        if (delta <= 0.0) {
            lambda_bar = 2.0 * (lambda - delta / p_norm2);
            delta = -delta + lambda * p_norm2;
            lambda = lambda_bar;
        }

        const double mu = dot(p, r);
        const double alpha = mu / delta;
        for (int i = 0; i < D; ++i) trial[i] = w[i] + alpha * p[i];
        const double trial_loss = obj.loss(trial);
        const double comparison = 2.0 * delta * (loss - trial_loss) / (mu * mu);

        double epoch_loss;
        if (comparison >= 0.0) {
            w.swap(trial);
            loss = obj.loss_grad(w, grad);
            for (int i = 0; i < D; ++i) r_new[i] = -grad[i];
            lambda_bar = 0.0;
            success = true;
            if (k % D == 0) {
                p = r_new; // restart with steepest descent
            } else {
                const double beta = (dot(r_new, r_new) - dot(r_new, r)) / mu;
                for (int i = 0; i < D; ++i) p[i] = r_new[i] + beta * p[i];
            }
            r = r_new;
            if (comparison >= 0.75) lambda *= 0.25;
            epoch_loss = loss;
        } else {
            lambda_bar = lambda;
            success = false;
            epoch_loss = loss;
        }
        if (comparison < 0.25) lambda += delta * (1.0 - comparison) / p_norm2;
        if (!std::isfinite(lambda)) throw TrainerFailure("SCG lambda diverged", loop.epoch() + 1);

        if (!loop.epoch_done(w, epoch_loss)) break;
    }
    return std::move(loop).result();
}

} // namespace tsens::detail
