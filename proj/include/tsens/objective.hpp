#pragma once

#include <functional>
#include <span>
#include <vector>

#include "tsens/common.hpp"
#include "tsens/mlp.hpp"

namespace tsens {

/// Minimization target shared by every trainer, so each algorithm body is
/// identical for the network path and for closed-form surrogate objectives.
class Objective {
public:
    virtual ~Objective() = default;

    virtual int dim() const = 0;
    virtual double loss(std::span<const double> w) const = 0;

    /// Fills grad and returns the loss at w.
    virtual double loss_grad(std::span<const double> w, std::span<double> grad) const = 0;

    /// Least-squares structure, required by LM: fills jtj (D*D row-major) and
    /// jtr with J^T J and J^T r for the residual vector at w, returns the
    /// loss (1/2 r^T r).
    virtual bool has_least_squares() const { return false; }
    virtual double gauss_newton(std::span<const double> w, std::span<double> jtj,
                                std::span<double> jtr) const;
};

/// Network training objective backed by the batched kernels.
class MlpObjective final : public Objective {
public:
    MlpObjective(const NetworkConfig& config, const PatternSet& patterns);

    int dim() const override { return config_.dim(); }
    double loss(std::span<const double> w) const override;
    double loss_grad(std::span<const double> w, std::span<double> grad) const override;
    bool has_least_squares() const override { return true; }
    double gauss_newton(std::span<const double> w, std::span<double> jtj,
                        std::span<double> jtr) const override;

private:
    NetworkConfig config_;
    const PatternSet& patterns_;
};

/// Wraps loss/gradient callables (surrogate objectives for oracle tests).
class FunctionObjective final : public Objective {
public:
    using LossFn = std::function<double(std::span<const double>)>;
    using GradFn = std::function<double(std::span<const double>, std::span<double>)>;

    FunctionObjective(int dim, LossFn loss, GradFn loss_grad)
        : dim_(dim), loss_(std::move(loss)), loss_grad_(std::move(loss_grad)) {}

    int dim() const override { return dim_; }
    double loss(std::span<const double> w) const override { return loss_(w); }
    double loss_grad(std::span<const double> w, std::span<double> grad) const override {
        return loss_grad_(w, grad);
    }

private:
    int dim_;
    LossFn loss_;
    GradFn loss_grad_;
};

/// Wraps a residual vector and its Jacobian (row-major m x D); provides the
/// least-squares view for LM surrogates and derives loss/gradient from it.
class ResidualObjective final : public Objective {
public:
    using ResidualFn = std::function<void(std::span<const double>, std::span<double>)>;
    using JacobianFn = std::function<void(std::span<const double>, std::span<double>)>;

    ResidualObjective(int dim, int residuals, ResidualFn r, JacobianFn j)
        : dim_(dim), m_(residuals), residual_(std::move(r)), jac_(std::move(j)) {}

    int dim() const override { return dim_; }
    int residual_count() const { return m_; }
    double loss(std::span<const double> w) const override;
    double loss_grad(std::span<const double> w, std::span<double> grad) const override;
    bool has_least_squares() const override { return true; }
    double gauss_newton(std::span<const double> w, std::span<double> jtj,
                        std::span<double> jtr) const override;

private:
    int dim_;
    int m_;
    ResidualFn residual_;
    JacobianFn jac_;
};

} // namespace tsens
