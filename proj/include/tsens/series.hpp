#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "tsens/common.hpp"

namespace tsens {

enum class TransformKind { Log10, LinearRescale };

/// A reversible elementwise transform. LinearRescale maps
/// [src_min, src_max] affinely onto [dst_min, dst_max]; Log10 ignores the
/// numeric fields.
struct TransformSpec {
    TransformKind kind = TransformKind::Log10;
    double src_min = 0.0;
    double src_max = 1.0;
    double dst_min = 0.0;
    double dst_max = 1.0;

    bool operator==(const TransformSpec&) const = default;

    double apply(double v) const;
    double invert(double v) const;
    void validate() const;
    std::string describe() const;
};

/// Ordered real-valued observations plus the transform history that produced
/// them from the raw data. Immutable in practice: every operation returns a
/// new series.
struct TimeSeries {
    std::vector<double> values;
    std::string name;
    std::vector<TransformSpec> transform_log;

    std::size_t size() const { return values.size(); }
};

struct SplitSpec {
    std::size_t train_len = 0;
    std::size_t validation_len = 0;
    std::size_t test_len = 0;
};

/// Sliding-window patterns: n rows of p inputs and q targets, stored
/// contiguously row-major so the compute kernels can consume them directly.
struct PatternSet {
    int p = 0;
    int q = 0;
    int n = 0;
    std::vector<double> inputs;  // n*p
    std::vector<double> targets; // n*q

    std::span<const double> input_row(int i) const {
        return {inputs.data() + static_cast<std::size_t>(i) * p, static_cast<std::size_t>(p)};
    }
    std::span<const double> target_row(int i) const {
        return {targets.data() + static_cast<std::size_t>(i) * q, static_cast<std::size_t>(q)};
    }
};

struct ErrorTriple {
    double mae = 0.0;
    double mse = 0.0;
    double mape = 0.0; // percent

    double sum() const { return mae + mse + mape; }
};

/// Reads a series from CSV: one observation per line, optional single header
/// line, optional leading date column (ignored). A single trailing blank line
/// is tolerated.
TimeSeries load_csv(const std::string& path);

TimeSeries apply_transform(const TimeSeries& series, const TransformSpec& spec);

/// Inverse of apply_transform; `spec` must be the last transform_log entry.
TimeSeries invert_transform(const TimeSeries& series, const TransformSpec& spec);

/// Elementwise helpers used for mapping forecasts between scales.
std::vector<double> apply_values(std::span<const double> values, const TransformSpec& spec);
std::vector<double> invert_values(std::span<const double> values,
                                  std::span<const TransformSpec> transform_log);

/// Chronological, contiguous, non-overlapping train/validation/test segments.
std::array<TimeSeries, 3> split(const TimeSeries& series, const SplitSpec& spec);

PatternSet window(std::span<const double> values, int p, int q);
PatternSet window(const TimeSeries& series, int p, int q);

/// MAE / MSE / MAPE over equal-length sequences. MAPE requires nonzero
/// actuals and is reported in percent.
ErrorTriple metrics(std::span<const double> actual, std::span<const double> forecast);

} // namespace tsens
