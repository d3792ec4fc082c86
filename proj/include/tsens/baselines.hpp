#pragma once

#include <span>
#include <utility>
#include <vector>

#include "tsens/series.hpp"

namespace tsens {

/// AR(p) with intercept: y_t = c + phi_1 y_{t-1} + ... + phi_p y_{t-p} + e_t.
struct ARModel {
    int p = 0;
    double intercept = 0.0;
    std::vector<double> phi;
    double resid_variance = 0.0;
};

/// Ordinary least squares on the lagged regression.
ARModel fit_ar(std::span<const double> values, int p);
ARModel fit_ar(const TimeSeries& series, int p);

/// One-step-ahead forecasts with actual lags; history must contain the
/// forecast span as its final `horizon` entries (same teacher-forcing
/// convention as the network forecasts).
std::vector<double> forecast_ar(const ARModel& model, std::span<const double> history,
                                int horizon);

/// Reconstruction state for exact inversion of (1-L)^d (1-L^s)^D.
struct DifferenceState {
    int s = 1;
    // Head values retained before each differencing stage, in application
    // order: d stages of lag 1 followed by D stages of lag s.
    std::vector<std::vector<double>> heads;
};

std::pair<std::vector<double>, DifferenceState> seasonal_difference(std::span<const double> values,
                                                                    int d, int D, int s);
std::vector<double> invert_difference(std::span<const double> differenced,
                                      const DifferenceState& state);

/// SARIMA(0,1,1)x(0,1,1)_s with zero intercept:
/// (1-L)(1-L^s) y_t = (1 + theta1 L)(1 + Theta1 L^s) e_t.
struct SarimaModel {
    int s = 12;
    double theta1 = 0.0;
    double Theta1 = 0.0;
    double resid_variance = 0.0;
};

/// Conditional sum of squares of the MA(1)x(1)_s recursion on the doubly
/// differenced series (pre-sample residuals zero).
double sarima_css(std::span<const double> w, double theta1, double Theta1, int s);

/// CSS fit via the BFGS surrogate path under a logistic reparameterization
/// that keeps |theta1|, |Theta1| < 1.
SarimaModel fit_sarima_ma(std::span<const double> values, int s);
SarimaModel fit_sarima_ma(const TimeSeries& series, int s);

/// One-step-ahead forecasts on the original scale: the MA recursion runs on
/// the differenced series with residuals from actuals, then the differencing
/// is inverted exactly. Teacher-forcing convention as forecast_ar.
std::vector<double> forecast_sarima(const SarimaModel& model, std::span<const double> history,
                                    int horizon);

} // namespace tsens
