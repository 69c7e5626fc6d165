#include "spcvm/kernels.hpp"

#if defined(SPCVM_HAVE_NEON_VARIANT)

#include <arm_neon.h>

// NEON is baseline on aarch64, so no target attributes or cpuid gating are
// needed; the dispatcher still treats it as a selectable variant.

namespace spcvm::kernels::neon {

double dot(const double* a, const double* b, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
        acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
    }
    double s = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum(const double* a, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        acc0 = vaddq_f64(acc0, vld1q_f64(a + i));
        acc1 = vaddq_f64(acc1, vld1q_f64(a + i + 2));
    }
    double s = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i) s += a[i];
    return s;
}

double sumsq(const double* a, std::size_t n) {
    float64x2_t acc0 = vdupq_n_f64(0.0);
    float64x2_t acc1 = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        float64x2_t v0 = vld1q_f64(a + i);
        float64x2_t v1 = vld1q_f64(a + i + 2);
        acc0 = vfmaq_f64(acc0, v0, v0);
        acc1 = vfmaq_f64(acc1, v1, v1);
    }
    double s = vaddvq_f64(acc0) + vaddvq_f64(acc1);
    for (; i < n; ++i) s += a[i] * a[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    float64x2_t va = vdupq_n_f64(alpha);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        float64x2_t vy = vld1q_f64(y + i);
        vy = vfmaq_f64(vy, va, vld1q_f64(x + i));
        vst1q_f64(y + i, vy);
    }
    for (; i < n; ++i) y[i] += alpha * x[i];
}

double weighted_indicator_le(const double* u, double t, const double* w, std::size_t n) {
    float64x2_t vt = vdupq_n_f64(t);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        uint64x2_t mask = vcleq_f64(vld1q_f64(u + i), vt);
        float64x2_t masked = vreinterpretq_f64_u64(
            vandq_u64(mask, vreinterpretq_u64_f64(vld1q_f64(w + i))));
        acc = vaddq_f64(acc, masked);
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i)
        if (u[i] <= t) s += w[i];
    return s;
}

double weighted_indicator_le2(const double* u1, const double* u2, double t1, double t2,
                              const double* w, std::size_t n) {
    float64x2_t vt1 = vdupq_n_f64(t1);
    float64x2_t vt2 = vdupq_n_f64(t2);
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        uint64x2_t m1 = vcleq_f64(vld1q_f64(u1 + i), vt1);
        uint64x2_t m2 = vcleq_f64(vld1q_f64(u2 + i), vt2);
        float64x2_t masked = vreinterpretq_f64_u64(
            vandq_u64(vandq_u64(m1, m2), vreinterpretq_u64_f64(vld1q_f64(w + i))));
        acc = vaddq_f64(acc, masked);
    }
    double s = vaddvq_f64(acc);
    for (; i < n; ++i)
        if (u1[i] <= t1 && u2[i] <= t2) s += w[i];
    return s;
}

} // namespace spcvm::kernels::neon

#endif // SPCVM_HAVE_NEON_VARIANT
