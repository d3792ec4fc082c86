#include "tsens/baselines.hpp"

#include <Eigen/Dense>

#include <cmath>

#include "tsens/objective.hpp"
#include "tsens/trainers.hpp"

namespace tsens {

namespace {

// (-1, 1) reparameterization for the MA coefficients.
double squash(double u) { return 2.0 / (1.0 + std::exp(-u)) - 1.0; }
double squash_derivative(double theta) { return 0.5 * (1.0 - theta * theta); }

std::vector<double> difference_once(std::span<const double> values, int lag) {
    std::vector<double> out(values.size() - lag);
    for (std::size_t t = 0; t < out.size(); ++t) out[t] = values[t + lag] - values[t];
    return out;
}

} // namespace

ARModel fit_ar(std::span<const double> values, int p) {
    if (p < 1) throw TsError("fit_ar: order must be >= 1");
    const int n = static_cast<int>(values.size());
    if (n <= 2 * p + 1)
        throw TsError("fit_ar: series of length " + std::to_string(n) +
                      " is too short for order " + std::to_string(p));

    const int rows = n - p;
    Eigen::MatrixXd x(rows, p + 1);
    Eigen::VectorXd y(rows);
    for (int r = 0; r < rows; ++r) {
        x(r, 0) = 1.0;
        for (int i = 1; i <= p; ++i) x(r, i) = values[r + p - i];
        y(r) = values[r + p];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x);
    if (qr.rank() < p + 1)
        throw TsError("fit_ar: rank-deficient lag design (constant or degenerate series)");
    const Eigen::VectorXd beta = qr.solve(y);

    ARModel model;
    model.p = p;
    model.intercept = beta(0);
    model.phi.assign(beta.data() + 1, beta.data() + 1 + p);
    model.resid_variance = (y - x * beta).squaredNorm() / rows;
    return model;
}

ARModel fit_ar(const TimeSeries& series, int p) {
    return fit_ar(std::span<const double>(series.values), p);
}

std::vector<double> forecast_ar(const ARModel& model, std::span<const double> history,
                                int horizon) {
    if (horizon < 0) throw TsError("forecast_ar: horizon must be >= 0");
    const int n = static_cast<int>(history.size());
    if (n < model.p + horizon) throw TsError("forecast_ar: insufficient history");
    std::vector<double> out;
    out.reserve(horizon);
    for (int t = n - horizon; t < n; ++t) {
        double v = model.intercept;
        for (int i = 1; i <= model.p; ++i) v += model.phi[i - 1] * history[t - i];
        out.push_back(v);
    }
    return out;
}

std::pair<std::vector<double>, DifferenceState> seasonal_difference(std::span<const double> values,
                                                                    int d, int D, int s) {
    if (d < 0 || D < 0 || (D > 0 && s < 1)) throw TsError("seasonal_difference: bad orders");
    if (static_cast<int>(values.size()) <= d + D * s)
        throw TsError("seasonal_difference: series too short for the requested differencing");

    DifferenceState state;
    state.s = s;
    std::vector<double> current(values.begin(), values.end());
    for (int stage = 0; stage < d; ++stage) {
        state.heads.emplace_back(current.begin(), current.begin() + 1);
        current = difference_once(current, 1);
    }
    for (int stage = 0; stage < D; ++stage) {
        state.heads.emplace_back(current.begin(), current.begin() + s);
        current = difference_once(current, s);
    }
    return {std::move(current), std::move(state)};
}

std::vector<double> invert_difference(std::span<const double> differenced,
                                      const DifferenceState& state) {
    std::vector<double> current(differenced.begin(), differenced.end());
    for (auto head = state.heads.rbegin(); head != state.heads.rend(); ++head) {
        const int lag = static_cast<int>(head->size());
        std::vector<double> restored(current.size() + lag);
        std::copy(head->begin(), head->end(), restored.begin());
        for (std::size_t t = lag; t < restored.size(); ++t)
            restored[t] = restored[t - lag] + current[t - lag];
        current = std::move(restored);
    }
    return current;
}

double sarima_css(std::span<const double> w, double theta1, double Theta1, int s) {
    const int n = static_cast<int>(w.size());
    std::vector<double> eps(n, 0.0);
    auto at = [&](int t) { return t >= 0 ? eps[t] : 0.0; };
    double css = 0.0;
    for (int t = 0; t < n; ++t) {
        eps[t] = w[t] - theta1 * at(t - 1) - Theta1 * at(t - s) - theta1 * Theta1 * at(t - s - 1);
        css += eps[t] * eps[t];
    }
    return css;
}

SarimaModel fit_sarima_ma(std::span<const double> values, int s) {
    if (s < 2) throw TsError("fit_sarima_ma: seasonal period must be >= 2");
    auto [w, state] = seasonal_difference(values, 1, 1, s);
    if (static_cast<int>(w.size()) < 3 * s)
        throw TsError("fit_sarima_ma: differenced series shorter than 3 seasonal periods");

    const int n = static_cast<int>(w.size());
    // CSS and its analytic gradient through the residual recursions, chained
    // with the squashing reparameterization.
    auto css_and_grad = [&w, n, s](std::span<const double> u, double* grad_u) {
        const double theta = squash(u[0]);
        const double Theta = squash(u[1]);
        std::vector<double> eps(n), dth(n), dTh(n);
        auto at = [](const std::vector<double>& v, int t) { return t >= 0 ? v[t] : 0.0; };
        double css = 0.0, g_theta = 0.0, g_Theta = 0.0;
        for (int t = 0; t < n; ++t) {
            const double e1 = at(eps, t - 1), es = at(eps, t - s), es1 = at(eps, t - s - 1);
            eps[t] = w[t] - theta * e1 - Theta * es - theta * Theta * es1;
            dth[t] = -e1 - theta * at(dth, t - 1) - Theta * at(dth, t - s) - Theta * es1 -
                     theta * Theta * at(dth, t - s - 1);
            dTh[t] = -es - theta * at(dTh, t - 1) - Theta * at(dTh, t - s) - theta * es1 -
                     theta * Theta * at(dTh, t - s - 1);
            css += eps[t] * eps[t];
            g_theta += 2.0 * eps[t] * dth[t];
            g_Theta += 2.0 * eps[t] * dTh[t];
        }
        if (grad_u) {
            grad_u[0] = g_theta * squash_derivative(theta);
            grad_u[1] = g_Theta * squash_derivative(Theta);
        }
        return css;
    };

    FunctionObjective objective(
        2, [&](std::span<const double> u) { return css_and_grad(u, nullptr); },
        [&](std::span<const double> u, std::span<double> grad) {
            return css_and_grad(u, grad.data());
        });

    TrainerSpec spec;
    spec.kind = TrainerKind::Bfgs;
    spec.max_epochs = 500;
    spec.stagnation_window = 50;
    const double u0[2] = {0.0, 0.0};
    std::vector<double> u;
    try {
        u = surrogate_minimize(spec, objective, 0, u0);
    } catch (const std::exception& e) {
        throw TsError(std::string("fit_sarima_ma: optimizer failure: ") + e.what());
    }

    SarimaModel model;
    model.s = s;
    model.theta1 = squash(u[0]);
    model.Theta1 = squash(u[1]);
    model.resid_variance = sarima_css(w, model.theta1, model.Theta1, s) / n;
    return model;
}

SarimaModel fit_sarima_ma(const TimeSeries& series, int s) {
    return fit_sarima_ma(std::span<const double>(series.values), s);
}

std::vector<double> forecast_sarima(const SarimaModel& model, std::span<const double> history,
                                    int horizon) {
    if (horizon < 0) throw TsError("forecast_sarima: horizon must be >= 0");
    const int s = model.s;
    const int n = static_cast<int>(history.size());
    if (n - horizon < s + 2) throw TsError("forecast_sarima: insufficient history");

    // w_t = y_t - y_{t-1} - y_{t-s} + y_{t-s-1}, defined for t >= s+1; the
    // residual recursion runs on actuals so each forecast is one-step-ahead.
    std::vector<double> eps(n, 0.0);
    auto eps_at = [&](int t) { return t >= s + 1 ? eps[t] : 0.0; };
    auto w_at = [&](int t) {
        return history[t] - history[t - 1] - history[t - s] + history[t - s - 1];
    };
    for (int t = s + 1; t < n; ++t)
        eps[t] = w_at(t) - model.theta1 * eps_at(t - 1) - model.Theta1 * eps_at(t - s) -
                 model.theta1 * model.Theta1 * eps_at(t - s - 1);

    std::vector<double> out;
    out.reserve(horizon);
    for (int t = n - horizon; t < n; ++t) {
        const double w_hat = model.theta1 * eps_at(t - 1) + model.Theta1 * eps_at(t - s) +
                             model.theta1 * model.Theta1 * eps_at(t - s - 1);
        out.push_back(w_hat + history[t - 1] + history[t - s] - history[t - s - 1]);
    }
    return out;
}

} // namespace tsens
