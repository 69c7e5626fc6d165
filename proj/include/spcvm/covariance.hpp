#pragma once

#include "spcvm/lattice.hpp"
#include "spcvm/mat.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace spcvm {

// Evaluation grid in copula space plus the latent Gaussian quantiles.
// Enumeration is the Cartesian product with the first coordinate fastest.
struct ThresholdGrid {
    int p = 0;
    int m_per_dim = 0;
    std::vector<double> probs;
    Mat latent;             // M x p
    Mat copula_thresholds;  // M x p

    std::size_t size() const { return latent.rows(); }
};

ThresholdGrid make_threshold_grid(int p, int m_per_dim);

// Gaussian copula dependence parameters: exponential spatial range phi and
// within-site cross-variable correlation rho (ignored for p = 1).
struct CopulaModel {
    double phi = 0.0;
    double rho = 0.0;
};

struct CalibrationConfig {
    int grid_size = 20;
    double h = 0.5;
    double s0x = 0.5, s0y = 0.5;
    KernelId kernel = KernelId::gaussian;
    int p = 2;
    int m_per_dim = 5;
    double rho = 0.5;
    double phi = 0.2;
    int K = 3;
    double mvn_tol = 1e-6;
    std::uint64_t seed = 20260301ULL;
    double dedup_quantum = 0.0; // 0 disables distance rounding

    bool operator==(const CalibrationConfig&) const = default;
};

struct CalibrationResult {
    CalibrationConfig config;
    Mat gamma;                       // M x M
    std::vector<double> eigenvalues; // retained, scaled by 1/(K*M), descending
    double a = 0.0;
    double nu = 0.0;
};

// Per-threshold orthant probabilities under the within-site correlation.
std::vector<double> marginal_orthant_probs(const ThresholdGrid& grid, double rho);

// Exact discrete covariance matrix of the scaled smoothed copula under the
// Gaussian copula model: per unique site distance, the 2p-dimensional joint
// orthant probability minus the marginal product, accumulated with the total
// pair weight at that distance and scaled by the effective sample size.
Mat exact_gamma(const CopulaModel& model, const ThresholdGrid& grid, const Mat& dist,
                const KernelWeights& weights, double mvn_tol, std::uint64_t seed,
                double dedup_quantum = 0.0);

struct SatterthwaiteParams {
    double a = 0.0;
    double nu = 0.0;
    std::vector<double> eigenvalues; // retained, scaled, descending
};

// Moment matching for the weighted chi-square mixture over the contrast
// subspace. Eigenvalues of (I_K - J_K/K) (x) Gamma are the spectrum of the
// symmetrized Gamma repeated K-1 times; values above 1e-10 are retained and
// then rescaled by 1/(K*M).
SatterthwaiteParams satterthwaite_params(const Mat& gamma, int K);

struct CacheStats {
    int hits = 0;
    int misses = 0;
};

// Full calibration pipeline. With a non-empty cache_dir the result is
// persisted under a content hash of the configuration and reloaded on
// repeat calls.
CalibrationResult calibrate(const CalibrationConfig& config, const std::string& cache_dir = "",
                            CacheStats* stats = nullptr);

} // namespace spcvm
