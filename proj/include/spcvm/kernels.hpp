#pragma once

#include <cstddef>

// Data-parallel inner loops used by the numeric layers: reductions for the
// kernel weights and test statistic, prefix dot products for the Cholesky
// factor and triangular matvec, and weighted indicator sums for the smoothed
// empirical copula. Each kernel has a scalar reference implementation and,
// where the target supports it, an AVX2 or NEON variant selected once at
// startup. Variants are equivalence-tested against the scalar reference;
// within one process the active variant never changes, so outputs are
// reproducible for a fixed seed regardless of thread count.

namespace spcvm::kernels {

enum class Variant { scalar, avx2, neon };

// Active variant: best supported by the CPU, overridable with
// SPCVM_SIMD=scalar|avx2|neon (ignored when unsupported).
Variant active();
const char* variant_name(Variant v);

// Test hook: force a specific variant (throws spcvm::Error if unsupported).
void force_variant(Variant v);

double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sumsq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);

// sum of w[j] over j with u[j] <= t
double weighted_indicator_le(const double* u, double t, const double* w, std::size_t n);
// sum of w[j] over j with u1[j] <= t1 and u2[j] <= t2
double weighted_indicator_le2(const double* u1, const double* u2, double t1, double t2,
                              const double* w, std::size_t n);

namespace scalar {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sumsq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double weighted_indicator_le(const double* u, double t, const double* w, std::size_t n);
double weighted_indicator_le2(const double* u1, const double* u2, double t1, double t2,
                              const double* w, std::size_t n);
} // namespace scalar

#if defined(__x86_64__) || defined(_M_X64)
#define SPCVM_HAVE_AVX2_VARIANT 1
namespace avx2 {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sumsq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double weighted_indicator_le(const double* u, double t, const double* w, std::size_t n);
double weighted_indicator_le2(const double* u1, const double* u2, double t1, double t2,
                              const double* w, std::size_t n);
} // namespace avx2
#endif

#if defined(__aarch64__)
#define SPCVM_HAVE_NEON_VARIANT 1
namespace neon {
double dot(const double* a, const double* b, std::size_t n);
double sum(const double* a, std::size_t n);
double sumsq(const double* a, std::size_t n);
void axpy(double alpha, const double* x, double* y, std::size_t n);
double weighted_indicator_le(const double* u, double t, const double* w, std::size_t n);
double weighted_indicator_le2(const double* u1, const double* u2, double t1, double t2,
                              const double* w, std::size_t n);
} // namespace neon
#endif

} // namespace spcvm::kernels
