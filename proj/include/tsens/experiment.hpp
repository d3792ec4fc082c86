#pragma once

#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "tsens/baselines.hpp"
#include "tsens/ensemble.hpp"
#include "tsens/series.hpp"
#include "tsens/trainers.hpp"

namespace tsens {

struct BaselineConfig {
    enum class Kind { None, Ar, Sarima };
    Kind kind = Kind::None;
    int order = 12;  // AR order
    int season = 12; // SARIMA seasonal period
    std::vector<TransformSpec> transforms;
};

struct ReportConfig {
    /// Number of transform-chain entries kept applied when reporting metrics:
    /// 0 = original scale, chain length = working scale, anything between is
    /// a partially transformed view (e.g. log10 for a log10+rescale chain).
    /// -1 means "working" and is resolved against the chain at load time.
    int depth = -1;
    double mse_display_factor = 1.0; // applied to MSE in comparison tables
    std::string label(int chain_length) const;
};

/// Declarative experiment description, loaded from a JSON config file.
struct ExperimentConfig {
    std::string config_path;
    std::string dataset; // resolved relative to the config file
    std::vector<TransformSpec> transforms;
    SplitSpec split;
    bool sann = false;
    NetworkConfig network;
    std::vector<TrainerSpec> trainers;
    int restarts = 50;
    std::uint64_t seed = 1;
    bool warm_start = false;
    int threads = 0;
    /// Training-loss stop level shared by every trainer ("predefined minimum
    /// error"). NaN = leave the per-trainer values alone; auto_loss_floor
    /// derives it from the in-sample noise level at run time.
    double loss_floor = std::numeric_limits<double>::quiet_NaN();
    bool auto_loss_floor = false;
    BaselineConfig baseline;
    ReportConfig report;
    std::string out_dir;
};

ExperimentConfig load_config(const std::string& path);

struct BaselineReport {
    std::string kind;
    std::optional<ARModel> ar;
    std::optional<SarimaModel> sarima;
    std::vector<double> forecast;          // baseline fitting scale
    std::vector<double> forecast_original;
    ErrorTriple test_errors;               // baseline fitting scale
    ErrorTriple test_errors_original;
};

struct RunReport {
    ExperimentConfig config;
    std::string dataset_name;
    std::size_t dataset_size = 0;
    EnsembleResult ensemble;
    std::optional<BaselineReport> baseline;
    double ensemble_seconds = 0.0;
    double baseline_seconds = 0.0;
    double total_seconds = 0.0;
    double resolved_loss_floor = 0.0; // after auto derivation

    /// Triples at the configured reporting scale (Table conventions).
    ErrorTriple reported_combined() const;
    ErrorTriple reported_member(std::size_t i) const;
    std::optional<ErrorTriple> reported_baseline() const;
};

/// The "auto" training-loss floor: (1/2) * n_patterns * q * sigma^2, where
/// sigma^2 is an in-sample noise estimate on the working scale (dof-corrected
/// AR(p) residual variance for one-step networks; halved variance of the
/// (1-L)(1-L^s) differences for seasonal ones). Uses no test data.
double derive_loss_floor(std::span<const double> insample_working, const NetworkConfig& network,
                         bool sann);

/// Executes the series -> ensemble -> baseline pipeline.
RunReport run_experiment(const ExperimentConfig& config);

/// Writes report.txt, report.json, errors.csv, forecasts.csv, and
/// trainer_mape.csv into config.out_dir (atomically: temp + rename).
void write_report_files(const RunReport& report);

/// Forecast-diagram data: index, actual, combined, one column per trainer,
/// original scale.
void emit_forecast_diagram_data(const EnsembleResult& result, const std::string& path);

/// Comparison table over saved report.json files: rows dataset x {MSE, MAPE},
/// columns ARIMA and Ensemble (plus each trainer when requested), with each
/// report's scale convention and MSE display factor applied. Returns the
/// table as CSV text and writes it to out_path when non-empty.
std::string compare_table(const std::vector<std::string>& report_paths,
                          const std::string& out_path, bool per_trainer = false);

/// Atomic text-file write used for every emitted artifact.
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace tsens
