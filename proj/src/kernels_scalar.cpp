#include "tsens/kernels.hpp"

#include <vector>

// Reference kernels: plain loops, no intrinsics. These define the semantics
// the SIMD variants are equivalence-tested against.

namespace tsens::kernels {
namespace {

void forward_one(const MlpDims& d, const double* w, const double* x, double* y, double* f,
                 double* df) {
    for (int j = 0; j < d.h; ++j) {
        double z = w[d.hidden_b(j)];
        const double* wj = w + d.hidden_w(j, 0);
        for (int i = 0; i < d.p; ++i) z += wj[i] * x[i];
        const double fj = logistic(z);
        f[j] = fj;
        if (df) df[j] = fj * (1.0 - fj);
    }
    for (int k = 0; k < d.q; ++k) {
        double out = w[d.out_b(k)];
        const double* ak = w + d.out_w(k, 0);
        for (int j = 0; j < d.h; ++j) out += ak[j] * f[j];
        y[k] = out;
    }
}

void forward_impl(const MlpDims& d, const double* w, const double* xs, int n, double* ys) {
    std::vector<double> f(d.h);
    for (int r = 0; r < n; ++r)
        forward_one(d, w, xs + static_cast<std::size_t>(r) * d.p,
                    ys + static_cast<std::size_t>(r) * d.q, f.data(), nullptr);
}

double loss_impl(const MlpDims& d, const double* w, const double* xs, const double* ts, int n) {
    std::vector<double> f(d.h), y(d.q);
    double acc = 0.0;
    for (int r = 0; r < n; ++r) {
        forward_one(d, w, xs + static_cast<std::size_t>(r) * d.p, y.data(), f.data(), nullptr);
        const double* t = ts + static_cast<std::size_t>(r) * d.q;
        for (int k = 0; k < d.q; ++k) {
            const double e = y[k] - t[k];
            acc += e * e;
        }
    }
    return 0.5 * acc;
}

double loss_grad_impl(const MlpDims& d, const double* w, const double* xs, const double* ts,
                      int n, double* grad) {
    const int D = d.dim();
    for (int c = 0; c < D; ++c) grad[c] = 0.0;

    std::vector<double> f(d.h), df(d.h), y(d.q), e(d.q);
    double acc = 0.0;
    for (int r = 0; r < n; ++r) {
        const double* x = xs + static_cast<std::size_t>(r) * d.p;
        const double* t = ts + static_cast<std::size_t>(r) * d.q;
        forward_one(d, w, x, y.data(), f.data(), df.data());
        for (int k = 0; k < d.q; ++k) {
            e[k] = y[k] - t[k];
            acc += e[k] * e[k];
            grad[d.out_b(k)] += e[k];
            double* ga = grad + d.out_w(k, 0);
            for (int j = 0; j < d.h; ++j) ga[j] += e[k] * f[j];
        }
        for (int j = 0; j < d.h; ++j) {
            double back = 0.0;
            for (int k = 0; k < d.q; ++k) back += w[d.out_w(k, j)] * e[k];
            const double delta = back * df[j];
            grad[d.hidden_b(j)] += delta;
            double* gw = grad + d.hidden_w(j, 0);
            for (int i = 0; i < d.p; ++i) gw[i] += delta * x[i];
        }
    }
    return 0.5 * acc;
}

double gauss_newton_impl(const MlpDims& d, const double* w, const double* xs, const double* ts,
                         int n, double* jtj, double* jtr) {
    const int D = d.dim();
    for (int c = 0; c < D * D; ++c) jtj[c] = 0.0;
    for (int c = 0; c < D; ++c) jtr[c] = 0.0;

    std::vector<double> f(d.h), df(d.h), y(d.q), row(D);
    double acc = 0.0;
    for (int r = 0; r < n; ++r) {
        const double* x = xs + static_cast<std::size_t>(r) * d.p;
        const double* t = ts + static_cast<std::size_t>(r) * d.q;
        forward_one(d, w, x, y.data(), f.data(), df.data());
        for (int k = 0; k < d.q; ++k) {
            const double e = y[k] - t[k];
            acc += e * e;
            // residual Jacobian row for (pattern r, output k)
            for (int c = 0; c < D; ++c) row[c] = 0.0;
            row[d.out_b(k)] = 1.0;
            for (int j = 0; j < d.h; ++j) {
                row[d.out_w(k, j)] = f[j];
                const double delta = w[d.out_w(k, j)] * df[j];
                row[d.hidden_b(j)] = delta;
                double* rw = row.data() + d.hidden_w(j, 0);
                for (int i = 0; i < d.p; ++i) rw[i] = delta * x[i];
            }
            for (int a = 0; a < D; ++a) {
                const double ra = row[a];
                if (ra == 0.0) continue;
                jtr[a] += e * ra;
                double* out = jtj + static_cast<std::size_t>(a) * D;
                for (int b = a; b < D; ++b) out[b] += ra * row[b];
            }
        }
    }
    // mirror the upper triangle
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < a; ++b)
            jtj[static_cast<std::size_t>(a) * D + b] = jtj[static_cast<std::size_t>(b) * D + a];
    return 0.5 * acc;
}

} // namespace

const Backend& scalar_backend() {
    static const Backend backend{"scalar", forward_impl, loss_impl, loss_grad_impl,
                                 gauss_newton_impl};
    return backend;
}

} // namespace tsens::kernels
