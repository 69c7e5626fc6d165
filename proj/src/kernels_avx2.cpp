#include "spcvm/kernels.hpp"

#if defined(SPCVM_HAVE_AVX2_VARIANT)

#include <immintrin.h>

// AVX2/FMA variants. Functions carry a target attribute so the rest of the
// translation unit (and the build) stays at the baseline ISA; the dispatcher
// only routes here after a cpuid check.

#define SPCVM_AVX2_FN __attribute__((target("avx2,fma")))

namespace spcvm::kernels::avx2 {

namespace {

SPCVM_AVX2_FN inline double hsum(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    lo = _mm_add_pd(lo, hi);
    __m128d swapped = _mm_unpackhi_pd(lo, lo);
    return _mm_cvtsd_f64(_mm_add_sd(lo, swapped));
}

} // namespace

SPCVM_AVX2_FN double dot(const double* a, const double* b, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
        acc1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), acc1);
    }
    for (; i + 4 <= n; i += 4)
        acc0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), acc0);
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

SPCVM_AVX2_FN double sum(const double* a, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
        acc1 = _mm256_add_pd(acc1, _mm256_loadu_pd(a + i + 4));
    }
    for (; i + 4 <= n; i += 4) acc0 = _mm256_add_pd(acc0, _mm256_loadu_pd(a + i));
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i];
    return s;
}

SPCVM_AVX2_FN double sumsq(const double* a, std::size_t n) {
    __m256d acc0 = _mm256_setzero_pd();
    __m256d acc1 = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 8 <= n; i += 8) {
        __m256d v0 = _mm256_loadu_pd(a + i);
        __m256d v1 = _mm256_loadu_pd(a + i + 4);
        acc0 = _mm256_fmadd_pd(v0, v0, acc0);
        acc1 = _mm256_fmadd_pd(v1, v1, acc1);
    }
    for (; i + 4 <= n; i += 4) {
        __m256d v = _mm256_loadu_pd(a + i);
        acc0 = _mm256_fmadd_pd(v, v, acc0);
    }
    double s = hsum(_mm256_add_pd(acc0, acc1));
    for (; i < n; ++i) s += a[i] * a[i];
    return s;
}

SPCVM_AVX2_FN void axpy(double alpha, const double* x, double* y, std::size_t n) {
    __m256d va = _mm256_set1_pd(alpha);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d vy = _mm256_loadu_pd(y + i);
        vy = _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i), vy);
        _mm256_storeu_pd(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

SPCVM_AVX2_FN double weighted_indicator_le(const double* u, double t, const double* w,
                                           std::size_t n) {
    __m256d vt = _mm256_set1_pd(t);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(u + i), vt, _CMP_LE_OQ);
        acc = _mm256_add_pd(acc, _mm256_and_pd(mask, _mm256_loadu_pd(w + i)));
    }
    double s = hsum(acc);
    for (; i < n; ++i)
        if (u[i] <= t) s += w[i];
    return s;
}

SPCVM_AVX2_FN double weighted_indicator_le2(const double* u1, const double* u2, double t1,
                                            double t2, const double* w, std::size_t n) {
    __m256d vt1 = _mm256_set1_pd(t1);
    __m256d vt2 = _mm256_set1_pd(t2);
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d m1 = _mm256_cmp_pd(_mm256_loadu_pd(u1 + i), vt1, _CMP_LE_OQ);
        __m256d m2 = _mm256_cmp_pd(_mm256_loadu_pd(u2 + i), vt2, _CMP_LE_OQ);
        acc = _mm256_add_pd(acc, _mm256_and_pd(_mm256_and_pd(m1, m2), _mm256_loadu_pd(w + i)));
    }
    double s = hsum(acc);
    for (; i < n; ++i)
        if (u1[i] <= t1 && u2[i] <= t2) s += w[i];
    return s;
}

} // namespace spcvm::kernels::avx2

#endif // SPCVM_HAVE_AVX2_VARIANT
