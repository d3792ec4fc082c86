#pragma once

// Internal driver shared by the eight trainer bodies. Each run_* implements
// one algorithm over an Objective; the Loop handles the trace, best-so-far
// tracking, and the budget / loss-floor / stagnation stops.

#include <cmath>
#include <vector>

#include "tsens/objective.hpp"
#include "tsens/trainers.hpp"

namespace tsens::detail {

struct MinimizeResult {
    std::vector<double> best;
    double best_loss = 0.0;
    TrainingTrace trace;
};

class Loop {
public:
    Loop(const TrainerSpec& spec, std::span<const double> x0, double initial_loss,
         const IterationObserver& observer)
        : spec_(spec), observer_(observer), best_(x0.begin(), x0.end()), best_loss_(initial_loss) {
        if (!std::isfinite(initial_loss)) throw TrainerFailure("non-finite loss at initialization", 0);
        trace_.initial_loss = initial_loss;
        trace_.reason = StopReason::Budget;
        best_history_.push_back(best_loss_);
        stopped_ = best_loss_ <= spec.loss_floor;
        if (stopped_) trace_.reason = StopReason::LossFloor;
    }

    bool stopped() const { return stopped_; }
    int epoch() const { return trace_.epochs(); }
    double best_loss() const { return best_loss_; }

    /// Records the loss at the iterate reached by this epoch. Returns false
    /// when training must stop.
    bool epoch_done(std::span<const double> w, double loss) {
        const int epoch = trace_.epochs() + 1;
        if (!std::isfinite(loss))
            throw TrainerFailure("non-finite loss at epoch " + std::to_string(epoch), epoch);
        trace_.epoch_loss.push_back(loss);
        if (loss < best_loss_) {
            best_loss_ = loss;
            best_.assign(w.begin(), w.end());
        }
        best_history_.push_back(best_loss_);
        if (observer_) observer_(epoch, w, loss);

        if (best_loss_ <= spec_.loss_floor) {
            trace_.reason = StopReason::LossFloor;
            return stop();
        }
        const int window = spec_.stagnation_window;
        if (window > 0 && epoch >= window &&
            best_history_[epoch - window] - best_loss_ < 1e-12) {
            trace_.reason = StopReason::Stagnation;
            return stop();
        }
        if (epoch >= spec_.max_epochs) {
            trace_.reason = StopReason::Budget;
            return stop();
        }
        return true;
    }

    /// Algorithm-specific termination (mu blow-up, zero gradient, failed line
    /// search).
    void converged() {
        trace_.reason = StopReason::Converged;
        stopped_ = true;
    }

    MinimizeResult result() && {
        return {std::move(best_), best_loss_, std::move(trace_)};
    }

private:
    bool stop() {
        stopped_ = true;
        return false;
    }

    const TrainerSpec& spec_;
    const IterationObserver& observer_;
    std::vector<double> best_;
    double best_loss_;
    std::vector<double> best_history_;
    TrainingTrace trace_;
    bool stopped_ = false;
};

MinimizeResult run_gd_momentum(const TrainerSpec&, const Objective&, std::vector<double> x0,
                               const IterationObserver&);
MinimizeResult run_rprop(const TrainerSpec&, const Objective&, std::vector<double> x0,
                         const IterationObserver&);
MinimizeResult run_scg(const TrainerSpec&, const Objective&, std::vector<double> x0,
                       const IterationObserver&);
MinimizeResult run_lm(const TrainerSpec&, const Objective&, std::vector<double> x0,
                      const IterationObserver&);
MinimizeResult run_quasi_newton(const TrainerSpec&, const Objective&, std::vector<double> x0,
                                const IterationObserver&, bool one_step_secant);
MinimizeResult run_pso(const TrainerSpec&, const Objective&, std::vector<double> x0, Rng& rng,
                       const IterationObserver&);

} // namespace tsens::detail
