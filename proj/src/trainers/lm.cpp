#include <Eigen/Dense>

#include <cmath>

#include "minimize_impl.hpp"

// Levenberg-Marquardt: solve (J^T J + mu I) delta = -J^T r, accept the step
// only when the loss decreases; mu shrinks on accept and grows on reject.
// A rejected trial still counts as an epoch so the per-epoch work is bounded.

namespace tsens::detail {

MinimizeResult run_lm(const TrainerSpec& spec, const Objective& obj, std::vector<double> w,
                      const IterationObserver& observer) {
    if (!obj.has_least_squares())
        throw TsError("LM requires an objective with least-squares structure");
    const int D = obj.dim();
    const auto& hp = spec.hyper;

    std::vector<double> jtj(static_cast<std::size_t>(D) * D), jtr(D), trial(D);
    // loss bookkeeping goes through obj.loss() only, so recorded values stay
    // consistent with recomputation no matter which kernel produced J^T J
    double loss = obj.loss(w);
    obj.gauss_newton(w, jtj, jtr);

    Loop loop(spec, w, loss, observer);
    double mu = hp.lm_mu0;
    bool refresh = false; // J^T J is current for w

    Eigen::MatrixXd a(D, D);
    Eigen::VectorXd rhs(D);
    while (!loop.stopped()) {
        if (refresh) {
            obj.gauss_newton(w, jtj, jtr);
            refresh = false;
        }
        for (int i = 0; i < D; ++i) {
            rhs(i) = -jtr[i];
            for (int j = 0; j < D; ++j) a(i, j) = jtj[static_cast<std::size_t>(i) * D + j];
            a(i, i) += mu;
        }
        const Eigen::VectorXd delta = Eigen::LDLT<Eigen::MatrixXd>(a).solve(rhs);
        if (!delta.allFinite())
            throw TsError("LM: linear solve produced non-finite step at mu=" + std::to_string(mu));

        for (int i = 0; i < D; ++i) trial[i] = w[i] + delta(i);
        const double trial_loss = obj.loss(trial);

        double epoch_loss;
        if (std::isfinite(trial_loss) && trial_loss < loss) {
            w.swap(trial);
            loss = trial_loss;
            mu = std::max(mu / hp.lm_mu_factor, 1e-12);
            refresh = true;
            epoch_loss = loss;
        } else {
            mu *= hp.lm_mu_factor;
            epoch_loss = loss;
        }
        if (!loop.epoch_done(w, epoch_loss)) break;
        if (mu > hp.lm_mu_max) {
            loop.converged();
            break;
        }
    }
    return std::move(loop).result();
}

} // namespace tsens::detail
