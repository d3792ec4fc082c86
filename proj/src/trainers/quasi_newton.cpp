#include <cmath>

#include "minimize_impl.hpp"

// BFGS with a dense inverse-Hessian approximation, and Battiti's one-step
// secant (memoryless) variant that keeps only the previous step s and
// gradient change y. Both share an Armijo backtracking line search.

namespace tsens::detail {

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
    return acc;
}

struct LineSearchResult {
    double t = 0.0;
    double loss = 0.0;
    bool ok = false;
};

LineSearchResult armijo_backtrack(const Objective& obj, std::span<const double> w,
                                  std::span<const double> dir, double loss0, double slope,
                                  const TrainerHyper& hp, std::vector<double>& scratch) {
    LineSearchResult res;
    double t = 1.0;
    for (int attempt = 0; attempt <= hp.ls_max_backtracks; ++attempt) {
        for (std::size_t i = 0; i < w.size(); ++i) scratch[i] = w[i] + t * dir[i];
        const double loss = obj.loss(scratch);
        if (std::isfinite(loss) && loss <= loss0 + hp.ls_armijo_c * t * slope) {
            res = {t, loss, true};
            return res;
        }
        t *= hp.ls_backtrack;
    }
    return res;
}

} // namespace

MinimizeResult run_quasi_newton(const TrainerSpec& spec, const Objective& obj,
                                std::vector<double> w, const IterationObserver& observer,
                                bool one_step_secant) {
    const int D = obj.dim();
    const auto& hp = spec.hyper;
    constexpr double kCurvatureFloor = 1e-10;

    std::vector<double> grad(D), dir(D), trial(D), s(D), y(D), grad_new(D), hy(D);
    // Dense inverse-Hessian approximation (BFGS only).
    std::vector<double> hinv;
    auto reset_hinv = [&] {
        hinv.assign(static_cast<std::size_t>(D) * D, 0.0);
        for (int i = 0; i < D; ++i) hinv[static_cast<std::size_t>(i) * D + i] = 1.0;
    };
    if (!one_step_secant) reset_hinv();

    double loss = obj.loss_grad(w, grad);
    Loop loop(spec, w, loss, observer);
    bool have_pair = false; // s, y hold the previous step and gradient change

    while (!loop.stopped()) {
        // search direction
        if (one_step_secant) {
            if (!have_pair) {
                for (int i = 0; i < D; ++i) dir[i] = -grad[i];
            } else {
                const double sy = dot(s, y);
                if (sy <= kCurvatureFloor) {
                    for (int i = 0; i < D; ++i) dir[i] = -grad[i];
                } else {
                    const double sg = dot(s, grad);
                    const double yg = dot(y, grad);
                    const double yy = dot(y, y);
                    const double b = sg / sy;
                    const double a = -(1.0 + yy / sy) * b + yg / sy;
                    for (int i = 0; i < D; ++i) dir[i] = -grad[i] + a * s[i] + b * y[i];
                }
            }
        } else {
            for (int i = 0; i < D; ++i) {
                double acc = 0.0;
                const double* row = hinv.data() + static_cast<std::size_t>(i) * D;
                for (int j = 0; j < D; ++j) acc += row[j] * grad[j];
                dir[i] = -acc;
            }
        }

        double slope = dot(grad, dir);
        if (slope >= 0.0) {
            // not a descent direction; fall back to steepest descent
            for (int i = 0; i < D; ++i) dir[i] = -grad[i];
            if (!one_step_secant) reset_hinv();
            have_pair = false;
            slope = dot(grad, dir);
            if (slope == 0.0) {
                loop.converged();
                break;
            }
        }

        const LineSearchResult ls = armijo_backtrack(obj, w, dir, loss, slope, hp, trial);
        if (!ls.ok) {
            loop.converged(); // line search exhausted; keep best-so-far
            break;
        }

        for (int i = 0; i < D; ++i) {
            s[i] = ls.t * dir[i];
            w[i] += s[i];
        }
        const double new_loss = obj.loss_grad(w, grad_new);
        for (int i = 0; i < D; ++i) y[i] = grad_new[i] - grad[i];

        const double sy = dot(s, y);
        if (!one_step_secant) {
            if (sy > kCurvatureFloor) {
                // H <- (I - rho s y^T) H (I - rho y s^T) + rho s s^T
                const double rho = 1.0 / sy;
                for (int i = 0; i < D; ++i) {
                    double acc = 0.0;
                    const double* row = hinv.data() + static_cast<std::size_t>(i) * D;
                    for (int j = 0; j < D; ++j) acc += row[j] * y[j];
                    hy[i] = acc;
                }
                const double yhy = dot(y, hy);
                const double c = (1.0 + rho * yhy) * rho;
                for (int i = 0; i < D; ++i) {
                    double* row = hinv.data() + static_cast<std::size_t>(i) * D;
                    for (int j = 0; j < D; ++j)
                        row[j] += c * s[i] * s[j] - rho * (hy[i] * s[j] + s[i] * hy[j]);
                }
            } else {
                // curvature guard: skip the update, restart from steepest descent
                reset_hinv();
            }
        }
        have_pair = sy > kCurvatureFloor;

        grad.swap(grad_new);
        loss = new_loss;
        if (!loop.epoch_done(w, loss)) break;
    }
    return std::move(loop).result();
}

} // namespace tsens::detail
