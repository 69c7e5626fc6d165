#include "spcvm/rf_sim.hpp"

#include "spcvm/baselines.hpp"
#include "spcvm/errors.hpp"
#include "spcvm/kernels.hpp"
#include "spcvm/mvn.hpp"
#include "spcvm/parallel.hpp"
#include "spcvm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace spcvm {

std::vector<std::string> SimulationConfig::resolved_methods() const {
    if (!methods.empty()) return methods;
    if (p == 1) return {"CvM", "KW", "ANOVA"};
    return {"CvM", "KW", "MANOVA"};
}

Mat build_site_covariance(const Mat& dist, double phi, double rho, int p) {
    if (!(phi > 0.0)) throw Error(ErrorKind::numeric, "build_site_covariance: phi must be > 0");
    if (p < 1 || p > 2)
        throw Error(ErrorKind::numeric, "build_site_covariance: p must be 1 or 2");
    const std::size_t n = dist.rows();
    const std::size_t pp = static_cast<std::size_t>(p);

    Mat sigma(n * pp, n * pp);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            const double spatial = std::exp(-dist(i, j) / phi);
            for (std::size_t a = 0; a < pp; ++a)
                for (std::size_t b = 0; b < pp; ++b)
                    sigma(i * pp + a, j * pp + b) = spatial * (a == b ? 1.0 : rho);
        }
    }
    return sigma;
}

Mat cholesky_jittered(const Mat& sigma, double jitter) {
    const std::size_t n = sigma.rows();
    if (sigma.cols() != n)
        throw Error(ErrorKind::numeric, "cholesky_jittered: matrix must be square");

    Mat chol(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        double diag = sigma(i, i) + jitter - kernels::sumsq(chol.row(i), i);
        if (!(diag > 0.0))
            throw Error(ErrorKind::numeric,
                        "cholesky_jittered: factorization failed at pivot " + std::to_string(i));
        const double pivot = std::sqrt(diag);
        chol(i, i) = pivot;
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = sigma(j, i) - kernels::dot(chol.row(j), chol.row(i), i);
            chol(j, i) = s / pivot;
        }
    }
    return chol;
}

FieldDataset simulate_fields(const Mat& chol_lower, const Lattice& lattice, int K, double delta,
                             std::uint64_t seed, int p) {
    const std::size_t n = lattice.size();
    const std::size_t pp = static_cast<std::size_t>(p);
    const std::size_t dim = n * pp;
    if (chol_lower.rows() != dim)
        throw Error(ErrorKind::numeric, "simulate_fields: factor size does not match lattice");

    FieldDataset data;
    data.lattice = lattice;
    data.fields.reserve(static_cast<std::size_t>(K));

    std::vector<double> z(dim);
    for (int k = 0; k < K; ++k) {
        NormalStream stream(mix_seed(seed, static_cast<std::uint64_t>(k)));
        for (std::size_t i = 0; i < dim; ++i) z[i] = stream.normal();

        const double shift = k == 0 ? delta : 0.0;
        Mat field(n, pp);
        for (std::size_t i = 0; i < dim; ++i) {
            double latent = shift + kernels::dot(chol_lower.row(i), z.data(), i + 1);
            field(i / pp, i % pp) = std::exp(latent);
        }
        data.fields.push_back(std::move(field));
        data.labels.push_back("field" + std::to_string(k + 1));
    }
    return data;
}

namespace {

double apply_method(const std::string& method, const FieldDataset& data,
                    const CalibrationResult& calib) {
    if (method == "CvM") return run_test(data, calib).p_value;
    if (method == "KW") {
        if (data.p() == 1) {
            std::vector<std::vector<double>> groups;
            for (const Mat& f : data.fields) {
                std::vector<double> g(f.rows());
                for (std::size_t r = 0; r < f.rows(); ++r) g[r] = f(r, 0);
                groups.push_back(std::move(g));
            }
            return kruskal_wallis(groups).p_value;
        }
        return kw_multivariate(data.fields);
    }
    if (method == "ANOVA") {
        std::vector<std::vector<double>> groups;
        for (const Mat& f : data.fields) {
            std::vector<double> g(f.rows());
            for (std::size_t r = 0; r < f.rows(); ++r) g[r] = f(r, 0);
            groups.push_back(std::move(g));
        }
        return anova_oneway(groups).p_value;
    }
    if (method == "MANOVA") return manova_pillai(data.fields).p_value;
    throw Error(ErrorKind::config, "unknown method '" + method + "'");
}

} // namespace

ResultsTable monte_carlo(const SimulationConfig& config, const std::string& cache_dir,
                         CacheStats* cache_stats, const CellObserver& observer) {
    if (config.n_replicates < 1)
        throw Error(ErrorKind::config, "monte_carlo: n_replicates must be >= 1");
    if (!(config.alpha > 0.0 && config.alpha < 1.0))
        throw Error(ErrorKind::config, "monte_carlo: alpha must lie in (0, 1)");
    for (double d : config.deltas)
        if (d < 0.0) throw Error(ErrorKind::config, "monte_carlo: deltas must be >= 0");

    const std::vector<std::string> methods = config.resolved_methods();
    const Lattice lattice = build_lattice(config.grid_size);
    const Mat dist = distance_matrix(lattice);
    const std::size_t n_rep = static_cast<std::size_t>(config.n_replicates);
    const double nan = std::numeric_limits<double>::quiet_NaN();

    ResultsTable table;
    for (std::size_t phi_idx = 0; phi_idx < config.phis.size(); ++phi_idx) {
        const double phi = config.phis[phi_idx];

        CalibrationConfig calib_config;
        calib_config.grid_size = config.grid_size;
        calib_config.h = config.h;
        calib_config.s0x = config.s0x;
        calib_config.s0y = config.s0y;
        calib_config.kernel = config.kernel;
        calib_config.p = config.p;
        calib_config.m_per_dim = config.m_per_dim;
        calib_config.rho = config.rho;
        calib_config.phi = phi;
        calib_config.K = config.K;
        calib_config.mvn_tol = config.mvn_tol;
        calib_config.seed = config.seed;
        calib_config.dedup_quantum = config.dedup_quantum;

        CalibrationResult calib;
        try {
            calib = calibrate(calib_config, cache_dir, cache_stats);
        } catch (const Error& e) {
            throw Error(ErrorKind::numeric, "monte_carlo: calibration failed for phi=" +
                                                std::to_string(phi) + ": " + e.what());
        }

        // one factor per phi, shared across deltas and replicates
        const Mat sigma = build_site_covariance(dist, phi, config.rho, config.p);
        const Mat chol = cholesky_jittered(sigma);

        for (std::size_t delta_idx = 0; delta_idx < config.deltas.size(); ++delta_idx) {
            const double delta = config.deltas[delta_idx];

            Mat pvals(n_rep, methods.size(), nan);
            parallel_for(n_rep, [&](std::size_t rep) {
                const std::uint64_t rep_seed =
                    mix_seed(mix_seed(mix_seed(config.seed, phi_idx), delta_idx), rep);
                const FieldDataset data =
                    simulate_fields(chol, lattice, config.K, delta, rep_seed, config.p);
                for (std::size_t mi = 0; mi < methods.size(); ++mi) {
                    try {
                        pvals(rep, mi) = apply_method(methods[mi], data, calib);
                    } catch (const Error&) {
                        // excluded from this method's denominator
                    }
                }
            });

            for (std::size_t mi = 0; mi < methods.size(); ++mi) {
                int valid = 0, rejected = 0;
                for (std::size_t rep = 0; rep < n_rep; ++rep) {
                    double p = pvals(rep, mi);
                    if (std::isnan(p)) continue;
                    ++valid;
                    if (p < config.alpha) ++rejected;
                }
                ResultsRow row;
                row.phi = phi;
                row.delta = delta;
                row.method = methods[mi];
                row.rejection_rate =
                    valid > 0 ? static_cast<double>(rejected) / valid
                              : std::numeric_limits<double>::quiet_NaN();
                row.n_effective = valid;
                table.rows.push_back(std::move(row));
            }

            if (observer) {
                CellPvalues cell;
                cell.phi = phi;
                cell.delta = delta;
                cell.methods = methods;
                cell.p_values = std::move(pvals);
                observer(cell);
            }
        }
    }
    return table;
}

} // namespace spcvm
