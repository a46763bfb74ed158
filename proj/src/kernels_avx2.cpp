#include "mfg/kernels.hpp"

#include <limits>

#if defined(MFG_HAVE_AVX2)
#include <immintrin.h>
#endif

namespace mfg::kernels::avx2 {

#if defined(MFG_HAVE_AVX2)

namespace {

double hsum(__m256d v) {
    const __m128d lo = _mm256_castpd256_pd128(v);
    const __m128d hi = _mm256_extractf128_pd(v, 1);
    const __m128d s = _mm_add_pd(lo, hi);
    return _mm_cvtsd_f64(_mm_add_sd(s, _mm_unpackhi_pd(s, s)));
}

}  // namespace

bool compiled() { return true; }

double dot(const double* w, const double* v, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        acc = _mm256_add_pd(acc, _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(v + i)));
    double s = hsum(acc);
    for (; i < n; ++i) s += w[i] * v[i];
    return s;
}

double dot3(const double* w, const double* a, const double* b, std::size_t n) {
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d p = _mm256_mul_pd(_mm256_loadu_pd(w + i), _mm256_loadu_pd(a + i));
        acc = _mm256_add_pd(acc, _mm256_mul_pd(p, _mm256_loadu_pd(b + i)));
    }
    double s = hsum(acc);
    for (; i < n; ++i) s += w[i] * a[i] * b[i];
    return s;
}

ArgMin hopf_lax_scan(double x, double inv_two_t, const double* y, const double* v, double* out,
                     std::size_t n) {
    const double inf = std::numeric_limits<double>::infinity();
    const __m256d vx = _mm256_set1_pd(x);
    const __m256d vk = _mm256_set1_pd(inv_two_t);
    __m256d best = _mm256_set1_pd(inf);
    // Lane indices are kept as doubles; exact far beyond any grid size used here.
    __m256d best_idx = _mm256_setzero_pd();
    __m256d idx = _mm256_set_pd(3.0, 2.0, 1.0, 0.0);
    const __m256d step = _mm256_set1_pd(4.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d d = _mm256_sub_pd(vx, _mm256_loadu_pd(y + i));
        const __m256d o = _mm256_add_pd(_mm256_mul_pd(_mm256_mul_pd(d, d), vk), _mm256_loadu_pd(v + i));
        _mm256_storeu_pd(out + i, o);
        const __m256d lt = _mm256_cmp_pd(o, best, _CMP_LT_OQ);
        best = _mm256_blendv_pd(best, o, lt);
        best_idx = _mm256_blendv_pd(best_idx, idx, lt);
        idx = _mm256_add_pd(idx, step);
    }
    alignas(32) double bv[4];
    alignas(32) double bi[4];
    _mm256_store_pd(bv, best);
    _mm256_store_pd(bi, best_idx);
    ArgMin r{inf, 0};
    for (int l = 0; l < 4; ++l) {
        const auto li = static_cast<std::size_t>(bi[l]);
        if (bv[l] < r.value || (bv[l] == r.value && bv[l] != inf && li < r.index)) r = {bv[l], li};
    }
    for (; i < n; ++i) {
        const double d = x - y[i];
        const double o = d * d * inv_two_t + v[i];
        out[i] = o;
        if (o < r.value) r = {o, i};
    }
    return r;
}

double trapezoid(double h, const double* f, std::size_t n) {
    if (n < 2) return 0.0;
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 1;
    for (; i + 4 <= n - 1; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(f + i));
    double s = hsum(acc);
    for (; i + 1 < n; ++i) s += f[i];
    return h * (s + 0.5 * (f[0] + f[n - 1]));
}

#else

bool compiled() { return false; }
double dot(const double* w, const double* v, std::size_t n) { return scalar::dot(w, v, n); }
double dot3(const double* w, const double* a, const double* b, std::size_t n) {
    return scalar::dot3(w, a, b, n);
}
ArgMin hopf_lax_scan(double x, double inv_two_t, const double* y, const double* v, double* out,
                     std::size_t n) {
    return scalar::hopf_lax_scan(x, inv_two_t, y, v, out, n);
}
double trapezoid(double h, const double* f, std::size_t n) { return scalar::trapezoid(h, f, n); }

#endif

}  // namespace mfg::kernels::avx2
