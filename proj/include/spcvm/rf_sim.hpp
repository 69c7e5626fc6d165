#pragma once

#include "spcvm/covariance.hpp"
#include "spcvm/lattice.hpp"
#include "spcvm/mat.hpp"
#include "spcvm/rank_test.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace spcvm {

struct SimulationConfig {
    int K = 3;
    int grid_size = 20;
    int p = 2;
    int n_replicates = 500;
    double alpha = 0.05;
    std::vector<double> phis{0.01, 0.2, 0.5};
    std::vector<double> deltas{0.0, 0.15, 0.30, 0.45};
    double rho = 0.5;
    double h = 0.5;
    double s0x = 0.5, s0y = 0.5;
    int m_per_dim = 5;
    std::uint64_t seed = 20260301ULL;
    std::vector<std::string> methods; // empty = defaults for p
    KernelId kernel = KernelId::gaussian;
    double mvn_tol = 1e-6;
    double dedup_quantum = 0.0;

    std::vector<std::string> resolved_methods() const;
};

struct ResultsRow {
    double phi = 0.0;
    double delta = 0.0;
    std::string method;
    double rejection_rate = 0.0;
    int n_effective = 0; // replicates that produced a p-value for this method
};

struct ResultsTable {
    std::vector<ResultsRow> rows;
};

// Latent covariance over sites and variables: Sigma_s[i,j] = exp(-d_ij/phi),
// expanded to Sigma_s (x) R_w with site-major, variable-fastest ordering.
Mat build_site_covariance(const Mat& dist, double phi, double rho, int p);

// Lower Cholesky factor of sigma + 1e-8 I.
Mat cholesky_jittered(const Mat& sigma, double jitter = 1e-8);

// One replicate: K fields of log-normal observations; field 0 receives the
// latent-scale shift delta on every coordinate. Per-field streams derive
// from (seed, field).
FieldDataset simulate_fields(const Mat& chol_lower, const Lattice& lattice, int K, double delta,
                             std::uint64_t seed, int p);

// Per-cell p-value matrix handed to the optional observer: one row per
// replicate, one column per method; NaN marks a method failure.
struct CellPvalues {
    double phi = 0.0;
    double delta = 0.0;
    std::vector<std::string> methods;
    Mat p_values;
};

using CellObserver = std::function<void(const CellPvalues&)>;

ResultsTable monte_carlo(const SimulationConfig& config, const std::string& cache_dir = "",
                         CacheStats* cache_stats = nullptr, const CellObserver& observer = {});

} // namespace spcvm
