#include "spcvm/covariance.hpp"

#include "spcvm/cache.hpp"
#include "spcvm/errors.hpp"
#include "spcvm/mvn.hpp"
#include "spcvm/parallel.hpp"
#include "spcvm/rng.hpp"
#include "spcvm/sym_eigen.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace spcvm {

ThresholdGrid make_threshold_grid(int p, int m_per_dim) {
    if (p < 1 || p > 2)
        throw Error(ErrorKind::numeric, "make_threshold_grid: p must be 1 or 2");
    if (m_per_dim < 1)
        throw Error(ErrorKind::numeric, "make_threshold_grid: m_per_dim must be >= 1");

    ThresholdGrid grid;
    grid.p = p;
    grid.m_per_dim = m_per_dim;
    grid.probs.resize(static_cast<std::size_t>(m_per_dim));
    const double lo = 0.02, hi = 0.98;
    for (int i = 0; i < m_per_dim; ++i)
        grid.probs[static_cast<std::size_t>(i)] =
            m_per_dim == 1 ? lo : lo + (hi - lo) * i / (m_per_dim - 1);

    std::vector<double> quantiles(grid.probs.size());
    for (std::size_t i = 0; i < grid.probs.size(); ++i)
        quantiles[i] = std_normal_quantile(grid.probs[i]);

    const std::size_t m_total = [&] {
        std::size_t m = 1;
        for (int d = 0; d < p; ++d) m *= static_cast<std::size_t>(m_per_dim);
        return m;
    }();
    grid.latent = Mat(m_total, static_cast<std::size_t>(p));
    grid.copula_thresholds = Mat(m_total, static_cast<std::size_t>(p));
    for (std::size_t i = 0; i < m_total; ++i) {
        std::size_t rem = i;
        for (int d = 0; d < p; ++d) {
            std::size_t idx = rem % static_cast<std::size_t>(m_per_dim);
            rem /= static_cast<std::size_t>(m_per_dim);
            grid.latent(i, static_cast<std::size_t>(d)) = quantiles[idx];
            grid.copula_thresholds(i, static_cast<std::size_t>(d)) = grid.probs[idx];
        }
    }
    return grid;
}

std::vector<double> marginal_orthant_probs(const ThresholdGrid& grid, double rho) {
    const std::size_t m = grid.size();
    std::vector<double> probs(m);
    for (std::size_t i = 0; i < m; ++i) {
        if (grid.p == 1) {
            probs[i] = std_normal_cdf(grid.latent(i, 0));
        } else {
            probs[i] = bvn_cdf(grid.latent(i, 0), grid.latent(i, 1), rho);
        }
    }
    return probs;
}

namespace {

// Cross-site correlation matrix over (Z1(s), ..., Zp(s), Z1(t), ..., Zp(t)):
// within-site blocks R_w (unit diagonal, rho off-diagonal), cross-site block
// rho_s * R_w.
CorrelationMatrix joint_site_correlation(int p, double rho, double rho_s) {
    CorrelationMatrix r;
    r.dim = 2 * p;
    for (int a = 0; a < p; ++a) {
        for (int b = 0; b < p; ++b) {
            double within = a == b ? 1.0 : rho;
            r.set(a, b, within);
            r.set(p + a, p + b, within);
            r.set(a, p + b, rho_s * within);
            r.set(p + a, b, rho_s * within);
        }
    }
    return r;
}

} // namespace

Mat exact_gamma(const CopulaModel& model, const ThresholdGrid& grid, const Mat& dist,
                const KernelWeights& weights, double mvn_tol, std::uint64_t seed,
                double dedup_quantum) {
    if (!(model.phi > 0.0)) throw Error(ErrorKind::numeric, "exact_gamma: phi must be > 0");
    const std::size_t n = dist.rows();
    if (dist.cols() != n || weights.w.size() != n)
        throw Error(ErrorKind::numeric, "exact_gamma: lattice size mismatch between inputs");

    const std::size_t m = grid.size();
    const std::vector<double> marg = marginal_orthant_probs(grid, model.rho);

    // unique distances and their accumulated pair weights, ascending
    std::map<double, double> weight_by_dist;
    for (std::size_t i = 0; i < n; ++i) {
        const double* row = dist.row(i);
        for (std::size_t j = 0; j < n; ++j) {
            double d = row[j];
            if (dedup_quantum > 0.0) d = std::round(d / dedup_quantum) * dedup_quantum;
            weight_by_dist[d] += weights.w[i] * weights.w[j];
        }
    }

    std::vector<std::pair<double, double>> dists(weight_by_dist.begin(), weight_by_dist.end());
    const std::size_t ndist = dists.size();

    std::vector<Mat> partial(ndist);
    parallel_for(ndist, [&](std::size_t di) {
        const double d = dists[di].first;
        const double weight_sum = dists[di].second;
        if (weight_sum < 1e-12) return;

        Mat part(m, m);
        const double rho_s = std::min(1.0, std::exp(-d / model.phi));
        const CorrelationMatrix corr = joint_site_correlation(grid.p, model.rho, rho_s);

        for (std::size_t r = 0; r < m; ++r) {
            for (std::size_t s = r; s < m; ++s) {
                double prob;
                if (grid.p == 1) {
                    prob = bvn_cdf(grid.latent(r, 0), grid.latent(s, 0), rho_s);
                } else {
                    OrthantQuery q;
                    q.dim = 2 * grid.p;
                    q.upper = {grid.latent(r, 0), grid.latent(r, 1), grid.latent(s, 0),
                               grid.latent(s, 1)};
                    q.corr = corr;
                    q.tol = mvn_tol;
                    q.seed = mix_seed(mix_seed(mix_seed(seed, di), r), s);
                    try {
                        prob = mvn_cdf(q);
                    } catch (const Error& e) {
                        std::ostringstream msg;
                        msg << "exact_gamma: calibration failed at distance " << d << " (index "
                            << di << "), thresholds (" << r << ", " << s << "): " << e.what();
                        throw Error(ErrorKind::numeric, msg.str());
                    }
                }
                double cov_val = std::max(0.0, std::min(1.0, prob)) - marg[r] * marg[s];
                double weighted = weight_sum * cov_val;
                part(r, s) += weighted;
                if (r != s) part(s, r) += weighted;
            }
        }
        partial[di] = std::move(part);
    });

    // deterministic reduction in ascending distance order
    Mat gamma(m, m);
    for (std::size_t di = 0; di < ndist; ++di) {
        if (partial[di].size() == 0) continue;
        for (std::size_t i = 0; i < m * m; ++i) gamma.data()[i] += partial[di].data()[i];
    }
    for (std::size_t i = 0; i < m * m; ++i) gamma.data()[i] *= weights.eff_n;
    return gamma;
}

SatterthwaiteParams satterthwaite_params(const Mat& gamma, int K) {
    if (K < 2) throw Error(ErrorKind::numeric, "satterthwaite_params: K must be >= 2");
    if (gamma.rows() != gamma.cols() || gamma.rows() == 0)
        throw Error(ErrorKind::numeric, "satterthwaite_params: gamma must be square");

    const std::size_t m = gamma.rows();
    Mat sym(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) sym(i, j) = 0.5 * (gamma(i, j) + gamma(j, i));

    // spectrum of C (x) Gamma with C = I_K - J_K/K: every eigenvalue of the
    // symmetrized Gamma appears K-1 times, plus M exact zeros
    const std::vector<double> gamma_eigs = symmetric_eigenvalues(sym);

    std::vector<double> retained;
    for (double g : gamma_eigs) {
        if (g > 1e-10) {
            for (int r = 0; r < K - 1; ++r) retained.push_back(g);
        }
    }
    if (retained.empty())
        throw Error(ErrorKind::numeric,
                    "satterthwaite_params: degenerate calibration, no eigenvalue above 1e-10");

    const double scale = 1.0 / (static_cast<double>(K) * static_cast<double>(m));
    double s1 = 0.0, s2 = 0.0;
    for (double& lambda : retained) {
        lambda *= scale;
        s1 += lambda;
        s2 += lambda * lambda;
    }

    SatterthwaiteParams out;
    out.a = s2 / s1;
    out.nu = s1 * s1 / s2;
    out.eigenvalues = std::move(retained);
    return out;
}

CalibrationResult calibrate(const CalibrationConfig& config, const std::string& cache_dir,
                            CacheStats* stats) {
    if (!cache_dir.empty()) {
        CalibrationResult cached;
        if (load_calibration(calibration_cache_path(cache_dir, config), config, cached)) {
            if (stats) ++stats->hits;
            return cached;
        }
        if (stats) ++stats->misses;
    }

    const Lattice lattice = build_lattice(config.grid_size);
    const Mat dist = distance_matrix(lattice);
    const KernelWeights weights =
        kernel_weights(lattice, config.s0x, config.s0y, config.h, config.kernel);
    const ThresholdGrid grid = make_threshold_grid(config.p, config.m_per_dim);

    CalibrationResult result;
    result.config = config;
    result.gamma = exact_gamma({config.phi, config.rho}, grid, dist, weights, config.mvn_tol,
                               config.seed, config.dedup_quantum);
    SatterthwaiteParams params = satterthwaite_params(result.gamma, config.K);
    result.eigenvalues = std::move(params.eigenvalues);
    result.a = params.a;
    result.nu = params.nu;

    if (!cache_dir.empty())
        store_calibration(calibration_cache_path(cache_dir, config), result);
    return result;
}

} // namespace spcvm
