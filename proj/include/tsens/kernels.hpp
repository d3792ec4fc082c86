#pragma once

#include <cmath>

namespace tsens::kernels {

/// Network dimensions plus the flat parameter layout shared by every kernel
/// and by the checkpoint format:
///
///   [0, h*p)             hidden weights, unit-major: w[j*p + i] multiplies
///                        input i of hidden unit j
///   [h*p, h*p + h)       hidden biases
///   [h*p + h, .. + q*h)  output weights, node-major: a[k*h + j]
///   [.., D)              output biases
///
/// D = h*(p + q + 1) + q.
struct MlpDims {
    int p = 1;
    int h = 1;
    int q = 1;

    int dim() const { return h * (p + q + 1) + q; }
    int hidden_w(int j, int i) const { return j * p + i; }
    int hidden_b(int j) const { return h * p + j; }
    int out_w(int k, int j) const { return h * p + h + k * h + j; }
    int out_b(int k) const { return h * p + h + q * h + k; }
};

/// Logistic activation, computed through the negative-exponent branch so the
/// argument of exp never exceeds 0.
inline double logistic(double x) {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

/// One batched-MLP compute backend. `xs` is n*p row-major, `ts`/`ys` n*q
/// row-major, `w` a flat parameter vector in MlpDims layout.
///
/// loss        = (1/2) * sum over patterns and output nodes of
///               (output - target)^2, returned by the loss-bearing kernels.
/// loss_grad   fills grad[D] with the analytic gradient of that loss.
/// gauss_newton fills jtj[D*D] (row-major, symmetric) and jtr[D] with J^T J
///             and J^T r for the residual Jacobian (residual = output-target),
///             so that J^T r equals the loss gradient.
struct Backend {
    const char* name;
    void (*forward)(const MlpDims&, const double* w, const double* xs, int n, double* ys);
    double (*loss)(const MlpDims&, const double* w, const double* xs, const double* ts, int n);
    double (*loss_grad)(const MlpDims&, const double* w, const double* xs, const double* ts,
                        int n, double* grad);
    double (*gauss_newton)(const MlpDims&, const double* w, const double* xs, const double* ts,
                           int n, double* jtj, double* jtr);
};

const Backend& scalar_backend();

bool avx2_available();
/// Valid only when avx2_available(); falls back to the scalar backend otherwise.
const Backend& avx2_backend();

/// Runtime-selected backend: AVX2+FMA when the CPU has it, scalar otherwise.
/// The TSENS_KERNEL environment variable ("scalar" or "avx2") forces a choice;
/// the selection is made once per process.
const Backend& active();

} // namespace tsens::kernels
