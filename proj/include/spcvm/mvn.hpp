#pragma once

#include <array>
#include <cstdint>

namespace spcvm {

double std_normal_pdf(double x);

// Phi(x), absolute error below 1e-12 over the full double range.
double std_normal_cdf(double x);

// Inverse of Phi on (0, 1); Halley-refined so the roundtrip through
// std_normal_cdf holds to ~1e-15.
double std_normal_quantile(double p);

// Upper tail of the chi-square distribution; nu may be fractional.
double chi2_survival(double x, double nu);

// P(Z1 <= a, Z2 <= b) for standard bivariate normal with correlation rho.
// Deterministic (adaptive Gauss-Legendre on the correlation-derivative
// representation); handles rho = +-1 in closed form.
double bvn_cdf(double a, double b, double rho);

struct CorrelationMatrix {
    int dim = 0;
    std::array<double, 16> m{}; // row-major dim x dim

    static CorrelationMatrix identity(int dim);

    double at(int i, int j) const { return m[static_cast<std::size_t>(i) * dim + j]; }
    void set(int i, int j, double v) { m[static_cast<std::size_t>(i) * dim + j] = v; }
};

struct OrthantQuery {
    int dim = 0;
    std::array<double, 4> upper{}; // +inf entries allowed
    CorrelationMatrix corr;
    double tol = 1e-6;
    std::uint64_t seed = 20260301ULL;
};

// P(Z <= upper componentwise), Z ~ N(0, corr), dim <= 4. Dimensions 1 and 2
// (after merging perfectly correlated coordinates) are evaluated
// deterministically; dimensions 3 and 4 use randomized QMC with shifts drawn
// from the query seed, converged to roughly the requested absolute tolerance.
double mvn_cdf(const OrthantQuery& q);

} // namespace spcvm
