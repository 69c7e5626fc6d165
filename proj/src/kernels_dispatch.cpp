#include "spcvm/kernels.hpp"

#include "spcvm/errors.hpp"

#include <atomic>
#include <cstdlib>
#include <string>

namespace spcvm::kernels {

namespace {

struct Table {
    double (*dot)(const double*, const double*, std::size_t);
    double (*sum)(const double*, std::size_t);
    double (*sumsq)(const double*, std::size_t);
    void (*axpy)(double, const double*, double*, std::size_t);
    double (*ind1)(const double*, double, const double*, std::size_t);
    double (*ind2)(const double*, const double*, double, double, const double*, std::size_t);
    Variant variant;
};

constexpr Table kScalarTable{scalar::dot,   scalar::sum,
                             scalar::sumsq, scalar::axpy,
                             scalar::weighted_indicator_le,
                             scalar::weighted_indicator_le2,
                             Variant::scalar};

#if defined(SPCVM_HAVE_AVX2_VARIANT)
constexpr Table kAvx2Table{avx2::dot,   avx2::sum,
                           avx2::sumsq, avx2::axpy,
                           avx2::weighted_indicator_le,
                           avx2::weighted_indicator_le2,
                           Variant::avx2};
#endif

#if defined(SPCVM_HAVE_NEON_VARIANT)
constexpr Table kNeonTable{neon::dot,   neon::sum,
                           neon::sumsq, neon::axpy,
                           neon::weighted_indicator_le,
                           neon::weighted_indicator_le2,
                           Variant::neon};
#endif

bool variant_supported(Variant v) {
    switch (v) {
        case Variant::scalar:
            return true;
        case Variant::avx2:
#if defined(SPCVM_HAVE_AVX2_VARIANT)
            return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
            return false;
#endif
        case Variant::neon:
#if defined(SPCVM_HAVE_NEON_VARIANT)
            return true;
#else
            return false;
#endif
    }
    return false;
}

const Table* table_for(Variant v) {
    switch (v) {
        case Variant::scalar:
            return &kScalarTable;
        case Variant::avx2:
#if defined(SPCVM_HAVE_AVX2_VARIANT)
            return &kAvx2Table;
#else
            break;
#endif
        case Variant::neon:
#if defined(SPCVM_HAVE_NEON_VARIANT)
            return &kNeonTable;
#else
            break;
#endif
    }
    return &kScalarTable;
}

Variant detect_variant() {
    if (const char* env = std::getenv("SPCVM_SIMD")) {
        std::string s(env);
        if (s == "scalar") return Variant::scalar;
        if (s == "avx2" && variant_supported(Variant::avx2)) return Variant::avx2;
        if (s == "neon" && variant_supported(Variant::neon)) return Variant::neon;
        // unknown or unsupported value: fall through to autodetect
    }
    if (variant_supported(Variant::avx2)) return Variant::avx2;
    if (variant_supported(Variant::neon)) return Variant::neon;
    return Variant::scalar;
}

std::atomic<const Table*> g_table{nullptr};

const Table& active_table() {
    const Table* t = g_table.load(std::memory_order_acquire);
    if (!t) {
        t = table_for(detect_variant());
        const Table* expected = nullptr;
        if (!g_table.compare_exchange_strong(expected, t, std::memory_order_acq_rel))
            t = expected;
    }
    return *t;
}

} // namespace

Variant active() { return active_table().variant; }

const char* variant_name(Variant v) {
    switch (v) {
        case Variant::scalar: return "scalar";
        case Variant::avx2: return "avx2";
        case Variant::neon: return "neon";
    }
    return "unknown";
}

void force_variant(Variant v) {
    if (!variant_supported(v))
        throw Error(ErrorKind::config,
                    std::string("SIMD variant not supported on this CPU: ") + variant_name(v));
    g_table.store(table_for(v), std::memory_order_release);
}

double dot(const double* a, const double* b, std::size_t n) {
    return active_table().dot(a, b, n);
}
double sum(const double* a, std::size_t n) { return active_table().sum(a, n); }
double sumsq(const double* a, std::size_t n) { return active_table().sumsq(a, n); }
void axpy(double alpha, const double* x, double* y, std::size_t n) {
    active_table().axpy(alpha, x, y, n);
}
double weighted_indicator_le(const double* u, double t, const double* w, std::size_t n) {
    return active_table().ind1(u, t, w, n);
}
double weighted_indicator_le2(const double* u1, const double* u2, double t1, double t2,
                              const double* w, std::size_t n) {
    return active_table().ind2(u1, u2, t1, t2, w, n);
}

} // namespace spcvm::kernels
