#include "tsens/mlp.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tsens {

namespace {

void check_params(const NetworkConfig& config, std::span<const double> params) {
    if (static_cast<int>(params.size()) != config.dim())
        throw TsError("parameter vector has length " + std::to_string(params.size()) +
                      ", expected D=" + std::to_string(config.dim()));
}

void check_patterns(const NetworkConfig& config, const PatternSet& patterns) {
    if (patterns.p != config.p || patterns.q != config.q)
        throw TsError("pattern set shape (p=" + std::to_string(patterns.p) +
                      ", q=" + std::to_string(patterns.q) + ") does not match network (p=" +
                      std::to_string(config.p) + ", q=" + std::to_string(config.q) + ")");
    if (patterns.n < 1) throw TsError("pattern set is empty");
}

} // namespace

StructuredParams unflatten(const NetworkConfig& config, std::span<const double> params) {
    check_params(config, params);
    const auto d = config.dims();
    StructuredParams sp;
    sp.hidden_weights.assign(config.h, std::vector<double>(config.p));
    sp.hidden_bias.assign(config.h, 0.0);
    sp.output_weights.assign(config.q, std::vector<double>(config.h));
    sp.output_bias.assign(config.q, 0.0);
    for (int j = 0; j < config.h; ++j) {
        for (int i = 0; i < config.p; ++i) sp.hidden_weights[j][i] = params[d.hidden_w(j, i)];
        sp.hidden_bias[j] = params[d.hidden_b(j)];
    }
    for (int k = 0; k < config.q; ++k) {
        for (int j = 0; j < config.h; ++j) sp.output_weights[k][j] = params[d.out_w(k, j)];
        sp.output_bias[k] = params[d.out_b(k)];
    }
    return sp;
}

std::vector<double> flatten(const NetworkConfig& config, const StructuredParams& sp) {
    const auto d = config.dims();
    std::vector<double> params(config.dim());
    for (int j = 0; j < config.h; ++j) {
        for (int i = 0; i < config.p; ++i) params[d.hidden_w(j, i)] = sp.hidden_weights[j][i];
        params[d.hidden_b(j)] = sp.hidden_bias[j];
    }
    for (int k = 0; k < config.q; ++k) {
        for (int j = 0; j < config.h; ++j) params[d.out_w(k, j)] = sp.output_weights[k][j];
        params[d.out_b(k)] = sp.output_bias[k];
    }
    return params;
}

std::vector<double> init_params(const NetworkConfig& config, Rng& rng) {
    std::vector<double> params(config.dim());
    for (double& v : params) v = rng.uniform(-0.5, 0.5);
    return params;
}

std::vector<double> forward(const NetworkConfig& config, std::span<const double> params,
                            std::span<const double> input) {
    check_params(config, params);
    if (static_cast<int>(input.size()) != config.p)
        throw TsError("forward: input has length " + std::to_string(input.size()) + ", expected p=" +
                      std::to_string(config.p));
    std::vector<double> out(config.q);
    kernels::active().forward(config.dims(), params.data(), input.data(), 1, out.data());
    return out;
}

double sse_loss(const NetworkConfig& config, std::span<const double> params,
                const PatternSet& patterns) {
    check_params(config, params);
    check_patterns(config, patterns);
    return kernels::active().loss(config.dims(), params.data(), patterns.inputs.data(),
                                  patterns.targets.data(), patterns.n);
}

std::vector<double> gradient(const NetworkConfig& config, std::span<const double> params,
                             const PatternSet& patterns) {
    check_params(config, params);
    check_patterns(config, patterns);
    std::vector<double> grad(config.dim());
    kernels::active().loss_grad(config.dims(), params.data(), patterns.inputs.data(),
                                patterns.targets.data(), patterns.n, grad.data());
    return grad;
}

std::vector<double> jacobian(const NetworkConfig& config, std::span<const double> params,
                             const PatternSet& patterns) {
    check_params(config, params);
    check_patterns(config, patterns);
    const auto d = config.dims();
    const int D = d.dim();
    std::vector<double> jac(static_cast<std::size_t>(patterns.n) * config.q * D, 0.0);
    std::vector<double> f(config.h), df(config.h), out(config.q);

    for (int r = 0; r < patterns.n; ++r) {
        const double* x = patterns.inputs.data() + static_cast<std::size_t>(r) * config.p;
        for (int j = 0; j < config.h; ++j) {
            double z = params[d.hidden_b(j)];
            for (int i = 0; i < config.p; ++i) z += params[d.hidden_w(j, i)] * x[i];
            f[j] = kernels::logistic(z);
            df[j] = f[j] * (1.0 - f[j]);
        }
        for (int k = 0; k < config.q; ++k) {
            double* row = jac.data() + (static_cast<std::size_t>(r) * config.q + k) * D;
            row[d.out_b(k)] = 1.0;
            for (int j = 0; j < config.h; ++j) {
                row[d.out_w(k, j)] = f[j];
                const double delta = params[d.out_w(k, j)] * df[j];
                row[d.hidden_b(j)] = delta;
                for (int i = 0; i < config.p; ++i) row[d.hidden_w(j, i)] = delta * x[i];
            }
        }
    }
    return jac;
}

std::vector<double> forecast_one_step(const NetworkConfig& config, std::span<const double> params,
                                      std::span<const double> history, int horizon) {
    check_params(config, params);
    if (config.q != 1) throw TsError("forecast_one_step requires q = 1");
    if (horizon < 0) throw TsError("forecast horizon must be >= 0");
    if (static_cast<int>(history.size()) < config.p + horizon)
        throw TsError("forecast_one_step: history of length " + std::to_string(history.size()) +
                      " is too short for p=" + std::to_string(config.p) + " and horizon " +
                      std::to_string(horizon));

    std::vector<double> out;
    out.reserve(horizon);
    const int start = static_cast<int>(history.size()) - horizon;
    for (int t = start; t < static_cast<int>(history.size()); ++t)
        out.push_back(forward(config, params, history.subspan(t - config.p, config.p))[0]);
    return out;
}

std::vector<double> forecast_seasonal(const NetworkConfig& config, std::span<const double> params,
                                      std::span<const double> history, int horizon) {
    check_params(config, params);
    if (config.q != config.p) throw TsError("forecast_seasonal requires q = p = s");
    if (horizon < 0) throw TsError("forecast horizon must be >= 0");
    const int s = config.p;
    if (static_cast<int>(history.size()) < s)
        throw TsError("forecast_seasonal: history shorter than the seasonal period");

    std::vector<double> block(history.end() - s, history.end());
    std::vector<double> out;
    out.reserve(horizon);
    while (static_cast<int>(out.size()) < horizon) {
        block = forward(config, params, block);
        for (int k = 0; k < s && static_cast<int>(out.size()) < horizon; ++k)
            out.push_back(block[k]);
    }
    return out;
}

void save_checkpoint(const std::string& path, const NetworkConfig& config,
                     std::span<const double> params) {
    check_params(config, params);
    std::ofstream out(path);
    if (!out) throw TsError("cannot write checkpoint: " + path);
    out << config.p << " " << config.h << " " << config.q << "\n";
    char buf[40];
    for (double v : params) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf << "\n";
    }
    if (!out) throw TsError("write failure on checkpoint: " + path);
}

std::pair<NetworkConfig, std::vector<double>> load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw TsError("cannot open checkpoint: " + path);
    int p = 0, h = 0, q = 0;
    if (!(in >> p >> h >> q)) throw TsError("malformed checkpoint header in " + path);
    NetworkConfig config(p, h, q);
    std::vector<double> params(config.dim());
    for (double& v : params)
        if (!(in >> v)) throw TsError("checkpoint " + path + " is truncated");
    return {config, std::move(params)};
}

} // namespace tsens
