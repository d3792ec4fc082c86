#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tsens/common.hpp"
#include "tsens/kernels.hpp"
#include "tsens/series.hpp"

namespace tsens {

/// (p, h, q) feedforward network: logistic hidden layer, identity output.
struct NetworkConfig {
    int p = 1;
    int h = 1;
    int q = 1;

    NetworkConfig() = default;
    NetworkConfig(int p_, int h_, int q_) : p(p_), h(h_), q(q_) {
        if (p < 1 || h < 1 || q < 1) throw TsError("network dimensions must all be >= 1");
    }

    int dim() const { return dims().dim(); }
    kernels::MlpDims dims() const { return kernels::MlpDims{p, h, q}; }
    bool operator==(const NetworkConfig&) const = default;
};

/// Per-layer view of the flat parameter vector (layout in kernels::MlpDims).
struct StructuredParams {
    std::vector<std::vector<double>> hidden_weights; // [h][p]
    std::vector<double> hidden_bias;                 // [h]
    std::vector<std::vector<double>> output_weights; // [q][h]
    std::vector<double> output_bias;                 // [q]
};

StructuredParams unflatten(const NetworkConfig& config, std::span<const double> params);
std::vector<double> flatten(const NetworkConfig& config, const StructuredParams& sp);

/// D values i.i.d. uniform on [-0.5, 0.5].
std::vector<double> init_params(const NetworkConfig& config, Rng& rng);

std::vector<double> forward(const NetworkConfig& config, std::span<const double> params,
                            std::span<const double> input);

/// E = (1/2) sum over patterns and output nodes of (target - output)^2.
double sse_loss(const NetworkConfig& config, std::span<const double> params,
                const PatternSet& patterns);

/// Analytic gradient of sse_loss in flat parameter order.
std::vector<double> gradient(const NetworkConfig& config, std::span<const double> params,
                             const PatternSet& patterns);

/// Residual Jacobian, row-major (n*q) x D; residual = output - target, rows
/// ordered pattern-major then output node. J^T r equals gradient().
std::vector<double> jacobian(const NetworkConfig& config, std::span<const double> params,
                             const PatternSet& patterns);

/// One-step-ahead forecasts with teacher forcing: history must contain the
/// actual observations of the forecast span as its final `horizon` entries;
/// the forecast for each of those positions uses the p actual values
/// preceding it. Requires q = 1.
std::vector<double> forecast_one_step(const NetworkConfig& config, std::span<const double> params,
                                      std::span<const double> history, int horizon);

/// Seasonal block forecasts for (s, h, s) networks: history ends where
/// forecasting begins; the first block is computed from the last s actuals
/// and later blocks feed the previous forecast block back as input. The
/// result is truncated to `horizon`.
std::vector<double> forecast_seasonal(const NetworkConfig& config, std::span<const double> params,
                                      std::span<const double> history, int horizon);

/// Plain-text checkpoint: "p h q" header plus D decimal values at 17
/// significant digits (round-trip exact).
void save_checkpoint(const std::string& path, const NetworkConfig& config,
                     std::span<const double> params);
std::pair<NetworkConfig, std::vector<double>> load_checkpoint(const std::string& path);

} // namespace tsens
