#include "spcvm/kernels.hpp"

// Reference kernels. Plain loops with four-way accumulator splitting so the
// scalar and vector variants associate additions the same way up to lane
// width; equivalence tests compare against these within a small tolerance.

namespace spcvm::kernels::scalar {

double dot(const double* a, const double* b, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * b[i];
        s1 += a[i + 1] * b[i + 1];
        s2 += a[i + 2] * b[i + 2];
        s3 += a[i + 3] * b[i + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (; i < n; ++i) s += a[i] * b[i];
    return s;
}

double sum(const double* a, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i];
        s1 += a[i + 1];
        s2 += a[i + 2];
        s3 += a[i + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (; i < n; ++i) s += a[i];
    return s;
}

double sumsq(const double* a, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        s0 += a[i] * a[i];
        s1 += a[i + 1] * a[i + 1];
        s2 += a[i + 2] * a[i + 2];
        s3 += a[i + 3] * a[i + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (; i < n; ++i) s += a[i] * a[i];
    return s;
}

void axpy(double alpha, const double* x, double* y, std::size_t n) {
    for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

double weighted_indicator_le(const double* u, double t, const double* w, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        if (u[i] <= t) s0 += w[i];
        if (u[i + 1] <= t) s1 += w[i + 1];
        if (u[i + 2] <= t) s2 += w[i + 2];
        if (u[i + 3] <= t) s3 += w[i + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (; i < n; ++i)
        if (u[i] <= t) s += w[i];
    return s;
}

double weighted_indicator_le2(const double* u1, const double* u2, double t1, double t2,
                              const double* w, std::size_t n) {
    double s0 = 0.0, s1 = 0.0, s2 = 0.0, s3 = 0.0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        if (u1[i] <= t1 && u2[i] <= t2) s0 += w[i];
        if (u1[i + 1] <= t1 && u2[i + 1] <= t2) s1 += w[i + 1];
        if (u1[i + 2] <= t1 && u2[i + 2] <= t2) s2 += w[i + 2];
        if (u1[i + 3] <= t1 && u2[i + 3] <= t2) s3 += w[i + 3];
    }
    double s = (s0 + s1) + (s2 + s3);
    for (; i < n; ++i)
        if (u1[i] <= t1 && u2[i] <= t2) s += w[i];
    return s;
}

} // namespace spcvm::kernels::scalar
