#include "tsens/objective.hpp"

#include "tsens/kernels.hpp"

namespace tsens {

double Objective::gauss_newton(std::span<const double>, std::span<double>,
                               std::span<double>) const {
    throw TsError("objective does not provide the least-squares structure LM needs");
}

MlpObjective::MlpObjective(const NetworkConfig& config, const PatternSet& patterns)
    : config_(config), patterns_(patterns) {
    if (patterns.p != config.p || patterns.q != config.q)
        throw TsError("pattern set does not match network shape");
}

double MlpObjective::loss(std::span<const double> w) const {
    return kernels::active().loss(config_.dims(), w.data(), patterns_.inputs.data(),
                                  patterns_.targets.data(), patterns_.n);
}

double MlpObjective::loss_grad(std::span<const double> w, std::span<double> grad) const {
    return kernels::active().loss_grad(config_.dims(), w.data(), patterns_.inputs.data(),
                                       patterns_.targets.data(), patterns_.n, grad.data());
}

double MlpObjective::gauss_newton(std::span<const double> w, std::span<double> jtj,
                                  std::span<double> jtr) const {
    return kernels::active().gauss_newton(config_.dims(), w.data(), patterns_.inputs.data(),
                                          patterns_.targets.data(), patterns_.n, jtj.data(),
                                          jtr.data());
}

double ResidualObjective::loss(std::span<const double> w) const {
    std::vector<double> r(m_);
    residual_(w, r);
    double acc = 0.0;
    for (double v : r) acc += v * v;
    return 0.5 * acc;
}

double ResidualObjective::loss_grad(std::span<const double> w, std::span<double> grad) const {
    std::vector<double> r(m_), jac(static_cast<std::size_t>(m_) * dim_);
    residual_(w, r);
    jac_(w, jac);
    double acc = 0.0;
    for (int c = 0; c < dim_; ++c) grad[c] = 0.0;
    for (int i = 0; i < m_; ++i) {
        acc += r[i] * r[i];
        const double* row = jac.data() + static_cast<std::size_t>(i) * dim_;
        for (int c = 0; c < dim_; ++c) grad[c] += row[c] * r[i];
    }
    return 0.5 * acc;
}

double ResidualObjective::gauss_newton(std::span<const double> w, std::span<double> jtj,
                                       std::span<double> jtr) const {
    std::vector<double> r(m_), jac(static_cast<std::size_t>(m_) * dim_);
    residual_(w, r);
    jac_(w, jac);
    for (int c = 0; c < dim_ * dim_; ++c) jtj[c] = 0.0;
    for (int c = 0; c < dim_; ++c) jtr[c] = 0.0;
    double acc = 0.0;
    for (int i = 0; i < m_; ++i) {
        acc += r[i] * r[i];
        const double* row = jac.data() + static_cast<std::size_t>(i) * dim_;
        for (int a = 0; a < dim_; ++a) {
            jtr[a] += row[a] * r[i];
            for (int b = 0; b < dim_; ++b)
                jtj[static_cast<std::size_t>(a) * dim_ + b] += row[a] * row[b];
        }
    }
    return 0.5 * acc;
}

} // namespace tsens
