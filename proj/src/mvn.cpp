#include "spcvm/mvn.hpp"

#include "spcvm/errors.hpp"
#include "spcvm/rng.hpp"
#include "spcvm/special.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

namespace spcvm {

namespace {

constexpr double kInv_Sqrt2 = 0.70710678118654752440;
constexpr double kInv_Sqrt2Pi = 0.39894228040143267794;
constexpr double kTwoPi = 6.28318530717958647692;

} // namespace

double std_normal_pdf(double x) { return kInv_Sqrt2Pi * std::exp(-0.5 * x * x); }

double std_normal_cdf(double x) {
    if (std::isnan(x)) throw Error(ErrorKind::numeric, "std_normal_cdf: NaN input");
    if (x == std::numeric_limits<double>::infinity()) return 1.0;
    if (x == -std::numeric_limits<double>::infinity()) return 0.0;
    return 0.5 * std::erfc(-x * kInv_Sqrt2);
}

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw Error(ErrorKind::numeric,
                    "std_normal_quantile: p must lie strictly inside (0, 1), got " +
                        std::to_string(p));
    // Initial guess from the Bailey/Hastings-style tail formula, refined by
    // Halley steps against the accurate CDF; converges in 3-4 iterations.
    double q = std::min(p, 1.0 - p);
    double t = std::sqrt(-2.0 * std::log(q));
    double x = t - (2.30753 + 0.27061 * t) / (1.0 + t * (0.99229 + 0.04481 * t));
    if (p < 0.5) x = -x;
    for (int it = 0; it < 8; ++it) {
        double err = std_normal_cdf(x) - p;
        double pdf = std_normal_pdf(x);
        if (pdf <= 0.0) break;
        double step = err / pdf;
        // Halley correction for the Gaussian: f''/f' = -x
        double dx = step / (1.0 + 0.5 * x * step);
        x -= dx;
        if (std::fabs(dx) < 1e-15 * (1.0 + std::fabs(x))) break;
    }
    return x;
}

double chi2_survival(double x, double nu) {
    if (x < 0.0 || nu <= 0.0)
        throw Error(ErrorKind::numeric, "chi2_survival: requires x >= 0 and nu > 0");
    if (x == 0.0) return 1.0;
    return gamma_q(0.5 * nu, 0.5 * x);
}

namespace {

// Integrand of dC/drho after the t = sin(theta) substitution:
// exp(-(a^2 + b^2 - 2ab sin(theta)) / (2 cos^2(theta))).
double bvn_theta_integrand(double a, double b, double theta) {
    double c = std::cos(theta);
    double s = std::sin(theta);
    double c2 = c * c;
    if (c2 < 1e-30) return 0.0; // interior quadrature nodes never hit this
    return std::exp(-(a * a + b * b - 2.0 * a * b * s) / (2.0 * c2));
}

} // namespace

double bvn_cdf(double a, double b, double rho) {
    if (std::isnan(a) || std::isnan(b) || std::isnan(rho))
        throw Error(ErrorKind::numeric, "bvn_cdf: NaN input");
    if (std::fabs(rho) > 1.0 + 1e-12)
        throw Error(ErrorKind::numeric, "bvn_cdf: |rho| > 1");
    rho = std::clamp(rho, -1.0, 1.0);
    const double inf = std::numeric_limits<double>::infinity();
    if (a == -inf || b == -inf) return 0.0;
    if (a == inf && b == inf) return 1.0;
    if (a == inf) return std_normal_cdf(b);
    if (b == inf) return std_normal_cdf(a);

    if (rho >= 1.0 - 1e-15) return std_normal_cdf(std::min(a, b));
    if (rho <= -1.0 + 1e-15) return std::max(0.0, std_normal_cdf(a) - std_normal_cdf(-b));

    auto f = [a, b](double theta) { return bvn_theta_integrand(a, b, theta); };
    const double quad_tol = 1e-14;
    if (std::fabs(rho) <= 0.925) {
        double integral = integrate_adaptive_gl(f, 0.0, std::asin(rho), quad_tol);
        return std_normal_cdf(a) * std_normal_cdf(b) + integral / kTwoPi;
    }
    if (rho > 0.0) {
        // integrate down from the rho = 1 endpoint
        double integral = integrate_adaptive_gl(f, std::asin(rho), 0.5 * M_PI, quad_tol);
        return std_normal_cdf(std::min(a, b)) - integral / kTwoPi;
    }
    double integral = integrate_adaptive_gl(f, -0.5 * M_PI, std::asin(rho), quad_tol);
    return std::max(0.0, std_normal_cdf(a) - std_normal_cdf(-b)) + integral / kTwoPi;
}

CorrelationMatrix CorrelationMatrix::identity(int dim) {
    CorrelationMatrix c;
    c.dim = dim;
    for (int i = 0; i < dim; ++i)
        for (int j = 0; j < dim; ++j) c.set(i, j, i == j ? 1.0 : 0.0);
    return c;
}

namespace {

// Eigenvalue floor check for small symmetric matrices via cyclic Jacobi.
double min_eigenvalue(const CorrelationMatrix& r) {
    int n = r.dim;
    std::array<double, 16> a = r.m;
    auto at = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
    for (int sweep = 0; sweep < 64; ++sweep) {
        double off = 0.0;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) off += at(p, q) * at(p, q);
        if (off < 1e-26) break;
        for (int p = 0; p < n; ++p) {
            for (int q = p + 1; q < n; ++q) {
                double apq = at(p, q);
                if (std::fabs(apq) < 1e-18) continue;
                double theta = 0.5 * (at(q, q) - at(p, p)) / apq;
                double t = (theta >= 0.0 ? 1.0 : -1.0) /
                           (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
                double c = 1.0 / std::sqrt(t * t + 1.0);
                double s = t * c;
                for (int k = 0; k < n; ++k) {
                    double akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    double apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
        }
    }
    double mn = at(0, 0);
    for (int i = 1; i < n; ++i) mn = std::min(mn, at(i, i));
    return mn;
}

void validate_query(const OrthantQuery& q) {
    if (q.dim < 1)
        throw Error(ErrorKind::numeric, "mvn_cdf: dimension must be >= 1");
    if (q.dim > 4)
        throw Error(ErrorKind::numeric,
                    "mvn_cdf: unsupported dimension " + std::to_string(q.dim) + " (max 4)");
    if (!(q.tol > 0.0 && q.tol <= 1e-2))
        throw Error(ErrorKind::numeric, "mvn_cdf: tol must lie in (0, 1e-2]");
    if (q.corr.dim != q.dim)
        throw Error(ErrorKind::numeric, "mvn_cdf: correlation dimension mismatch");
    for (int i = 0; i < q.dim; ++i) {
        if (std::fabs(q.corr.at(i, i) - 1.0) > 1e-12)
            throw Error(ErrorKind::numeric, "mvn_cdf: correlation diagonal must be 1");
        for (int j = 0; j < q.dim; ++j) {
            double v = q.corr.at(i, j);
            if (std::isnan(v) || std::fabs(v) > 1.0 + 1e-12)
                throw Error(ErrorKind::numeric, "mvn_cdf: off-diagonal entries must be in [-1, 1]");
            if (std::fabs(v - q.corr.at(j, i)) > 1e-12)
                throw Error(ErrorKind::numeric, "mvn_cdf: correlation matrix must be symmetric");
        }
        if (std::isnan(q.upper[static_cast<std::size_t>(i)]))
            throw Error(ErrorKind::numeric, "mvn_cdf: NaN upper bound");
    }
    if (q.dim >= 2 && min_eigenvalue(q.corr) < -1e-10)
        throw Error(ErrorKind::numeric,
                    "mvn_cdf: correlation matrix is not positive semidefinite within tolerance");
}

struct ReducedQuery {
    int dim;
    std::array<double, 4> upper;
    CorrelationMatrix corr;
};

ReducedQuery drop_coordinate(const ReducedQuery& q, int drop) {
    ReducedQuery out;
    out.dim = q.dim - 1;
    out.corr.dim = out.dim;
    int oi = 0;
    for (int i = 0; i < q.dim; ++i) {
        if (i == drop) continue;
        out.upper[static_cast<std::size_t>(oi)] = q.upper[static_cast<std::size_t>(i)];
        int oj = 0;
        for (int j = 0; j < q.dim; ++j) {
            if (j == drop) continue;
            out.corr.set(oi, oj, q.corr.at(i, j));
            ++oj;
        }
        ++oi;
    }
    return out;
}

double evaluate(const ReducedQuery& q, double tol, std::uint64_t seed);

// Merge coordinate pairs with |rho| = 1 (up to 1e-12). Positive pairs merge
// to the componentwise min threshold; negative pairs turn into a difference
// of two lower-dimensional orthant probabilities.
double merge_degenerate(const ReducedQuery& q, double tol, std::uint64_t seed) {
    for (int i = 0; i < q.dim; ++i) {
        for (int j = i + 1; j < q.dim; ++j) {
            double r = q.corr.at(i, j);
            if (r >= 1.0 - 1e-12) {
                ReducedQuery fused = q;
                fused.upper[static_cast<std::size_t>(i)] =
                    std::min(q.upper[static_cast<std::size_t>(i)],
                             q.upper[static_cast<std::size_t>(j)]);
                return evaluate(drop_coordinate(fused, j), tol, seed);
            }
            if (r <= -1.0 + 1e-12) {
                // Z_j = -Z_i: the constraint is -b_j <= Z_i <= b_i
                double bi = q.upper[static_cast<std::size_t>(i)];
                double bj = q.upper[static_cast<std::size_t>(j)];
                if (-bj > bi) return 0.0;
                ReducedQuery hi = q;
                hi.upper[static_cast<std::size_t>(i)] = bi;
                ReducedQuery lo = q;
                lo.upper[static_cast<std::size_t>(i)] = -bj;
                double p_hi = evaluate(drop_coordinate(hi, j), tol, mix_seed(seed, 1));
                double p_lo = evaluate(drop_coordinate(lo, j), tol, mix_seed(seed, 2));
                return std::max(0.0, p_hi - p_lo);
            }
        }
    }
    return -1.0; // no degenerate pair
}

// Genz sequential-conditioning transform + randomized lattice rule for
// effective dimensions 3 and 4.
double qmc_orthant(const ReducedQuery& q, double tol, std::uint64_t seed) {
    const int m = q.dim;
    const double inf = std::numeric_limits<double>::infinity();

    // order variables by ascending upper bound (finite bounds first)
    std::array<int, 4> order{};
    std::iota(order.begin(), order.begin() + m, 0);
    std::sort(order.begin(), order.begin() + m, [&](int i, int j) {
        return q.upper[static_cast<std::size_t>(i)] < q.upper[static_cast<std::size_t>(j)];
    });

    std::array<double, 4> b{};
    double chol[4][4] = {};
    for (int i = 0; i < m; ++i) {
        b[static_cast<std::size_t>(i)] = q.upper[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])];
        for (int j = 0; j < m; ++j)
            chol[i][j] = q.corr.at(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(j)]);
    }

    // in-place Cholesky with PSD-boundary clamping
    for (int i = 0; i < m; ++i) {
        double d = chol[i][i];
        for (int k = 0; k < i; ++k) d -= chol[i][k] * chol[i][k];
        if (d < -1e-10)
            throw Error(ErrorKind::numeric, "mvn_cdf: correlation matrix not PSD in factorization");
        chol[i][i] = d > 0.0 ? std::sqrt(d) : 0.0;
        for (int j = i + 1; j < m; ++j) {
            double s = chol[j][i];
            for (int k = 0; k < i; ++k) s -= chol[j][k] * chol[i][k];
            chol[j][i] = chol[i][i] > 0.0 ? s / chol[i][i] : 0.0;
        }
        for (int j = 0; j < i; ++j) chol[j][i] = 0.0;
    }

    const int ndim = m - 1; // integration dimensions
    auto integrand = [&](const double* w) {
        double y[4];
        double value = b[0] == inf ? 1.0 : std_normal_cdf(b[0] / chol[0][0]);
        double e_prev = value;
        for (int i = 1; i < m; ++i) {
            double u = std::clamp(e_prev * w[i - 1], 1e-300, 1.0 - 1e-16);
            y[i - 1] = std_normal_quantile(u);
            double shifted = b[static_cast<std::size_t>(i)];
            double e;
            if (shifted == inf) {
                e = 1.0;
            } else {
                for (int k = 0; k < i; ++k) shifted -= chol[i][k] * y[k];
                e = chol[i][i] > 0.0 ? std_normal_cdf(shifted / chol[i][i])
                                     : (shifted >= 0.0 ? 1.0 : 0.0);
            }
            value *= e;
            e_prev = e;
        }
        return value;
    };

    // Richtmyer generators: fractional parts of sqrt(prime)
    static const double kAlpha[3] = {1.41421356237309504880 - 1.0,
                                     1.73205080756887729352 - 1.0,
                                     2.23606797749978969640 - 2.0};
    constexpr int kShifts = 8;
    double shift[kShifts][3];
    {
        std::uint64_t s = seed;
        for (int r = 0; r < kShifts; ++r)
            for (int k = 0; k < 3; ++k) {
                s = splitmix64(s);
                shift[r][k] = static_cast<double>(s >> 11) * 0x1.0p-53;
            }
    }

    double sums[kShifts] = {};
    std::size_t npts = 0;
    std::size_t batch = 256;
    const std::size_t max_points = std::size_t{1} << 21;
    double estimate = 0.0;

    while (true) {
        for (int r = 0; r < kShifts; ++r) {
            double acc = 0.0;
            for (std::size_t j = npts + 1; j <= npts + batch; ++j) {
                double w[3];
                for (int k = 0; k < ndim; ++k) {
                    double x = static_cast<double>(j) * kAlpha[k] + shift[r][k];
                    x -= std::floor(x);
                    w[k] = std::fabs(2.0 * x - 1.0); // baker transform
                }
                acc += integrand(w);
            }
            sums[r] += acc;
        }
        npts += batch;

        double mean = 0.0;
        for (int r = 0; r < kShifts; ++r) mean += sums[r] / static_cast<double>(npts);
        mean /= kShifts;
        double var = 0.0;
        for (int r = 0; r < kShifts; ++r) {
            double d = sums[r] / static_cast<double>(npts) - mean;
            var += d * d;
        }
        double se = std::sqrt(var / (kShifts * (kShifts - 1.0)));
        estimate = mean;
        if (3.5 * se <= tol) break;
        if (npts >= max_points)
            throw Error(ErrorKind::numeric,
                        "mvn_cdf: failed to reach tolerance " + std::to_string(tol) +
                            " within the point budget (error estimate " + std::to_string(se) + ")");
        batch = npts; // double the sample
    }
    return estimate;
}

double evaluate(const ReducedQuery& q, double tol, std::uint64_t seed) {
    const double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < q.dim; ++i)
        if (q.upper[static_cast<std::size_t>(i)] == -inf) return 0.0;

    // drop +inf bounds: they do not constrain anything
    for (int i = 0; i < q.dim; ++i) {
        if (q.upper[static_cast<std::size_t>(i)] == inf && q.dim > 1)
            return evaluate(drop_coordinate(q, i), tol, seed);
    }

    if (q.dim == 1) {
        return std_normal_cdf(q.upper[0]);
    }

    double merged = merge_degenerate(q, tol, seed);
    if (merged >= 0.0) return merged;

    if (q.dim == 2) return bvn_cdf(q.upper[0], q.upper[1], q.corr.at(0, 1));
    return qmc_orthant(q, tol, seed);
}

} // namespace

double mvn_cdf(const OrthantQuery& q) {
    validate_query(q);
    ReducedQuery r{q.dim, q.upper, q.corr};
    return evaluate(r, q.tol, q.seed);
}

} // namespace spcvm
