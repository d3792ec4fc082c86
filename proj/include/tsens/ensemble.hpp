#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsens/series.hpp"
#include "tsens/trainers.hpp"

namespace tsens {

/// Validation performance and resulting combination weight of one trainer.
struct TrainerEvaluation {
    std::string name;
    TrainerSpec spec;
    ErrorTriple validation_errors; // working scale
    double g = 0.0;
    double w = 0.0;
    int selected_restart = -1;          // step-4 restart chosen by validation error sum
    int retrain_selected_restart = -1;  // step-6 restart chosen by in-sample loss
    double retrain_final_loss = 0.0;
};

struct EnsembleResult {
    std::vector<TrainerEvaluation> evaluations;

    // Working scale (the scale the models were trained on).
    std::vector<std::vector<double>> member_forecasts; // D_i, one per trainer
    std::vector<double> combined_forecast;             // D
    std::vector<ErrorTriple> member_test_errors;
    ErrorTriple combined_test_errors;
    std::vector<double> test_actuals;

    // Original scale, after inverting the series' transform chain.
    std::vector<std::vector<double>> member_forecasts_original;
    std::vector<double> combined_forecast_original;
    std::vector<ErrorTriple> member_test_errors_original;
    ErrorTriple combined_test_errors_original;
    std::vector<double> test_actuals_original;

    std::vector<std::string> warnings;
    std::uint64_t master_seed = 0;
    int restarts = 0;
};

/// Combination weight from validation errors: g = 1/(MAE+MSE+MAPE) clamped to
/// 50, w = exp(g).
std::pair<double, double> compute_weight(const ErrorTriple& validation_errors);

/// Elementwise weighted arithmetic mean of equal-length forecast vectors.
std::vector<double> combine(std::span<const double> weights,
                            const std::vector<std::vector<double>>& forecasts);

struct EnsembleOptions {
    bool warm_start = false; // step-6 restart 0 starts from the step-4 winner
    int threads = 0;         // 0 = hardware concurrency
};

/// The full multi-restart ensemble protocol over a chronological split:
/// train each algorithm on the training set (best restart by validation error
/// sum), weight by validation performance, retrain on training+validation
/// (best restart by in-sample loss), forecast the test span, and combine.
/// `series` is the working-scale series; its transform log is inverted to
/// produce the original-scale view of the result.
EnsembleResult run_ensemble(const TimeSeries& series, const SplitSpec& split_spec,
                            const NetworkConfig& config,
                            const std::vector<TrainerSpec>& trainer_specs, int restarts,
                            std::uint64_t master_seed, const EnsembleOptions& options = {});

} // namespace tsens
