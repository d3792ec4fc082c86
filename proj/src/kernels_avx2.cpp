#include "tsens/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <vector>

// AVX2+FMA variants of the batched MLP kernels. Patterns are processed four
// at a time (one double per lane); the remainder goes through the same scalar
// arithmetic as the reference backend. This TU is compiled with
// -mavx2 -mfma; it is only ever entered after a runtime CPU check.

namespace tsens::kernels {
namespace {

// exp(x) for 4 doubles, Cephes-style: n = round(x/ln2), r = x - n*ln2 split
// into hi/lo parts, e^r by a rational polynomial, scale by 2^n through the
// exponent field. Inputs outside [-708.39, 709.78] clamp to 0 / +inf.
inline __m256d exp_pd(__m256d x) {
    const __m256d max_x = _mm256_set1_pd(709.782712893383996732);
    const __m256d min_x = _mm256_set1_pd(-708.396418532264106224);

    const __m256d log2e = _mm256_set1_pd(1.44269504088896340736);
    const __m256d c1 = _mm256_set1_pd(6.93145751953125e-1);
    const __m256d c2 = _mm256_set1_pd(1.42860682030941723212e-6);

    const __m256d p0 = _mm256_set1_pd(1.26177193074810590878e-4);
    const __m256d p1 = _mm256_set1_pd(3.02994407707441961300e-2);
    const __m256d p2 = _mm256_set1_pd(9.99999999999999999910e-1);
    const __m256d q0 = _mm256_set1_pd(3.00198505138664455042e-6);
    const __m256d q1 = _mm256_set1_pd(2.52448340349684104192e-3);
    const __m256d q2 = _mm256_set1_pd(2.27265548208155028766e-1);
    const __m256d q3 = _mm256_set1_pd(2.00000000000000000005e0);

    const __m256d too_big = _mm256_cmp_pd(x, max_x, _CMP_GT_OQ);
    const __m256d too_small = _mm256_cmp_pd(x, min_x, _CMP_LT_OQ);
    x = _mm256_min_pd(_mm256_max_pd(x, min_x), max_x);

    const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, log2e),
                                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
    __m256d r = _mm256_fnmadd_pd(n, c1, x);
    r = _mm256_fnmadd_pd(n, c2, r);

    const __m256d rr = _mm256_mul_pd(r, r);
    __m256d px = _mm256_fmadd_pd(p0, rr, p1);
    px = _mm256_fmadd_pd(px, rr, p2);
    px = _mm256_mul_pd(px, r);
    __m256d qx = _mm256_fmadd_pd(q0, rr, q1);
    qx = _mm256_fmadd_pd(qx, rr, q2);
    qx = _mm256_fmadd_pd(qx, rr, q3);
    const __m256d ratio = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
    __m256d result = _mm256_fmadd_pd(_mm256_set1_pd(2.0), ratio, _mm256_set1_pd(1.0));

    // 2^n via the exponent field; n is within [-1022, 1024] after clamping.
    const __m128i n32 = _mm256_cvtpd_epi32(n);
    const __m256i n64 = _mm256_cvtepi32_epi64(n32);
    const __m256i pow2 =
        _mm256_slli_epi64(_mm256_add_epi64(n64, _mm256_set1_epi64x(1023)), 52);
    result = _mm256_mul_pd(result, _mm256_castsi256_pd(pow2));

    result = _mm256_blendv_pd(result, _mm256_set1_pd(0.0), too_small);
    result = _mm256_blendv_pd(result, _mm256_set1_pd(HUGE_VAL), too_big);
    return result;
}

// logistic(x) = 1/(1+e^-x), negative-exponent branch in both lanes' cases:
// e = exp(-|x|), then x>=0 -> 1/(1+e), x<0 -> e/(1+e).
inline __m256d logistic_pd(__m256d x) {
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d neg_abs = _mm256_min_pd(x, _mm256_sub_pd(_mm256_setzero_pd(), x));
    const __m256d e = exp_pd(neg_abs);
    const __m256d denom = _mm256_add_pd(one, e);
    const __m256d is_neg = _mm256_cmp_pd(x, _mm256_setzero_pd(), _CMP_LT_OQ);
    const __m256d num = _mm256_blendv_pd(one, e, is_neg);
    return _mm256_div_pd(num, denom);
}

inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(lo, _mm_unpackhi_pd(lo, lo)));
}

// Gathers column i of a 4-row block of the row-major n*cols matrix.
inline __m256d gather_col(const double* rows, int cols, int i) {
    return _mm256_set_pd(rows[3 * cols + i], rows[2 * cols + i], rows[1 * cols + i],
                         rows[0 * cols + i]);
}

// Scalar tail identical in structure to the reference backend.
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

// Hidden activations for a 4-pattern block. f[j] (and optionally df[j]) are
// 4-wide vectors.
inline void hidden_block(const MlpDims& d, const double* w, const double* xblock, __m256d* f,
                         __m256d* df) {
    for (int j = 0; j < d.h; ++j) {
        __m256d z = _mm256_set1_pd(w[d.hidden_b(j)]);
        const double* wj = w + d.hidden_w(j, 0);
        for (int i = 0; i < d.p; ++i)
            z = _mm256_fmadd_pd(_mm256_set1_pd(wj[i]), gather_col(xblock, d.p, i), z);
        const __m256d fj = logistic_pd(z);
        f[j] = fj;
        if (df) df[j] = _mm256_mul_pd(fj, _mm256_sub_pd(_mm256_set1_pd(1.0), fj));
    }
}

void forward_impl(const MlpDims& d, const double* w, const double* xs, int n, double* ys) {
    std::vector<__m256d> f(d.h);
    const int body = n & ~3;
    for (int r = 0; r < body; r += 4) {
        const double* xb = xs + static_cast<std::size_t>(r) * d.p;
        hidden_block(d, w, xb, f.data(), nullptr);
        for (int k = 0; k < d.q; ++k) {
            __m256d out = _mm256_set1_pd(w[d.out_b(k)]);
            const double* ak = w + d.out_w(k, 0);
            for (int j = 0; j < d.h; ++j)
                out = _mm256_fmadd_pd(_mm256_set1_pd(ak[j]), f[j], out);
            alignas(32) double lanes[4];
            _mm256_store_pd(lanes, out);
            for (int s = 0; s < 4; ++s) ys[static_cast<std::size_t>(r + s) * d.q + k] = lanes[s];
        }
    }
    std::vector<double> fs(d.h);
    for (int r = body; r < n; ++r)
        forward_one(d, w, xs + static_cast<std::size_t>(r) * d.p,
                    ys + static_cast<std::size_t>(r) * d.q, fs.data(), nullptr);
}

double loss_impl(const MlpDims& d, const double* w, const double* xs, const double* ts, int n) {
    std::vector<__m256d> f(d.h);
    __m256d acc = _mm256_setzero_pd();
    const int body = n & ~3;
    for (int r = 0; r < body; r += 4) {
        const double* xb = xs + static_cast<std::size_t>(r) * d.p;
        const double* tb = ts + static_cast<std::size_t>(r) * d.q;
        hidden_block(d, w, xb, f.data(), nullptr);
        for (int k = 0; k < d.q; ++k) {
            __m256d out = _mm256_set1_pd(w[d.out_b(k)]);
            const double* ak = w + d.out_w(k, 0);
            for (int j = 0; j < d.h; ++j)
                out = _mm256_fmadd_pd(_mm256_set1_pd(ak[j]), f[j], out);
            const __m256d e = _mm256_sub_pd(out, gather_col(tb, d.q, k));
            acc = _mm256_fmadd_pd(e, e, acc);
        }
    }
    double total = hsum(acc);
    std::vector<double> fs(d.h), y(d.q);
    for (int r = body; r < n; ++r) {
        forward_one(d, w, xs + static_cast<std::size_t>(r) * d.p, y.data(), fs.data(), nullptr);
        const double* t = ts + static_cast<std::size_t>(r) * d.q;
        for (int k = 0; k < d.q; ++k) {
            const double e = y[k] - t[k];
            total += e * e;
        }
    }
    return 0.5 * total;
}

double loss_grad_impl(const MlpDims& d, const double* w, const double* xs, const double* ts,
                      int n, double* grad) {
    const int D = d.dim();
    std::vector<__m256d> gacc(D, _mm256_setzero_pd());
    std::vector<__m256d> f(d.h), df(d.h), e(d.q);
    __m256d lacc = _mm256_setzero_pd();

    const int body = n & ~3;
    for (int r = 0; r < body; r += 4) {
        const double* xb = xs + static_cast<std::size_t>(r) * d.p;
        const double* tb = ts + static_cast<std::size_t>(r) * d.q;
        hidden_block(d, w, xb, f.data(), df.data());
        for (int k = 0; k < d.q; ++k) {
            __m256d out = _mm256_set1_pd(w[d.out_b(k)]);
            const double* ak = w + d.out_w(k, 0);
            for (int j = 0; j < d.h; ++j)
                out = _mm256_fmadd_pd(_mm256_set1_pd(ak[j]), f[j], out);
            const __m256d ek = _mm256_sub_pd(out, gather_col(tb, d.q, k));
            e[k] = ek;
            lacc = _mm256_fmadd_pd(ek, ek, lacc);
            gacc[d.out_b(k)] = _mm256_add_pd(gacc[d.out_b(k)], ek);
            for (int j = 0; j < d.h; ++j)
                gacc[d.out_w(k, j)] = _mm256_fmadd_pd(ek, f[j], gacc[d.out_w(k, j)]);
        }
        for (int j = 0; j < d.h; ++j) {
            __m256d back = _mm256_setzero_pd();
            for (int k = 0; k < d.q; ++k)
                back = _mm256_fmadd_pd(_mm256_set1_pd(w[d.out_w(k, j)]), e[k], back);
            const __m256d delta = _mm256_mul_pd(back, df[j]);
            gacc[d.hidden_b(j)] = _mm256_add_pd(gacc[d.hidden_b(j)], delta);
            for (int i = 0; i < d.p; ++i)
                gacc[d.hidden_w(j, i)] =
                    _mm256_fmadd_pd(delta, gather_col(xb, d.p, i), gacc[d.hidden_w(j, i)]);
        }
    }
    for (int c = 0; c < D; ++c) grad[c] = hsum(gacc[c]);
    double total = hsum(lacc);

    std::vector<double> fs(d.h), dfs(d.h), y(d.q), es(d.q);
    for (int r = body; r < n; ++r) {
        const double* x = xs + static_cast<std::size_t>(r) * d.p;
        const double* t = ts + static_cast<std::size_t>(r) * d.q;
        forward_one(d, w, x, y.data(), fs.data(), dfs.data());
        for (int k = 0; k < d.q; ++k) {
            es[k] = y[k] - t[k];
            total += es[k] * es[k];
            grad[d.out_b(k)] += es[k];
            for (int j = 0; j < d.h; ++j) grad[d.out_w(k, j)] += es[k] * fs[j];
        }
        for (int j = 0; j < d.h; ++j) {
            double back = 0.0;
            for (int k = 0; k < d.q; ++k) back += w[d.out_w(k, j)] * es[k];
            const double delta = back * dfs[j];
            grad[d.hidden_b(j)] += delta;
            for (int i = 0; i < d.p; ++i) grad[d.hidden_w(j, i)] += delta * x[i];
        }
    }
    return 0.5 * total;
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
            for (int c = 0; c < D; ++c) row[c] = 0.0;
            row[d.out_b(k)] = 1.0;
            for (int j = 0; j < d.h; ++j) {
                row[d.out_w(k, j)] = f[j];
                const double delta = w[d.out_w(k, j)] * df[j];
                row[d.hidden_b(j)] = delta;
                double* rw = row.data() + d.hidden_w(j, 0);
                for (int i = 0; i < d.p; ++i) rw[i] = delta * x[i];
            }
            // rank-1 update of the upper triangle, vectorized along columns
            for (int a = 0; a < D; ++a) {
                const double ra = row[a];
                if (ra == 0.0) continue;
                jtr[a] += e * ra;
                double* out = jtj + static_cast<std::size_t>(a) * D;
                const __m256d va = _mm256_set1_pd(ra);
                int b = a;
                for (; b + 4 <= D; b += 4) {
                    const __m256d prod =
                        _mm256_fmadd_pd(va, _mm256_loadu_pd(row.data() + b), _mm256_loadu_pd(out + b));
                    _mm256_storeu_pd(out + b, prod);
                }
                for (; b < D; ++b) out[b] += ra * row[b];
            }
        }
    }
    for (int a = 0; a < D; ++a)
        for (int b = 0; b < a; ++b)
            jtj[static_cast<std::size_t>(a) * D + b] = jtj[static_cast<std::size_t>(b) * D + a];
    return 0.5 * acc;
}

} // namespace

const Backend& avx2_backend() {
    static const Backend backend{"avx2", forward_impl, loss_impl, loss_grad_impl,
                                 gauss_newton_impl};
    return backend;
}

} // namespace tsens::kernels

#else

namespace tsens::kernels {
const Backend& avx2_backend() { return scalar_backend(); }
} // namespace tsens::kernels

#endif
