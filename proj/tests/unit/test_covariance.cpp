#include "spcvm/covariance.hpp"

#include "../common/oracles.hpp"
#include "spcvm/cache.hpp"
#include "spcvm/errors.hpp"
#include "spcvm/mvn.hpp"
#include "spcvm/rng.hpp"
#include "spcvm/sym_eigen.hpp"

#include <doctest.h>

#if defined(SPCVM_HAVE_EIGEN)
#include <Eigen/Dense>
#endif

#include <algorithm>
#include <cmath>
#include <filesystem>

using namespace spcvm;

TEST_CASE("threshold grid for M_per_dim = 5 reproduces the probability ladder") {
    ThresholdGrid grid = make_threshold_grid(1, 5);
    const double expected[] = {0.02, 0.26, 0.50, 0.74, 0.98};
    REQUIRE(grid.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(grid.probs[i] == doctest::Approx(expected[i]).epsilon(1e-14));
        CHECK(grid.copula_thresholds(i, 0) == doctest::Approx(expected[i]).epsilon(1e-14));
        CHECK(std_normal_cdf(grid.latent(i, 0)) ==
              doctest::Approx(expected[i]).epsilon(1e-10));
    }
}

TEST_CASE("bivariate threshold grid enumerates first coordinate fastest") {
    ThresholdGrid grid = make_threshold_grid(2, 3);
    REQUIRE(grid.size() == 9);
    // row i = (probs[i % 3], probs[i / 3])
    for (std::size_t i = 0; i < 9; ++i) {
        CHECK(grid.copula_thresholds(i, 0) ==
              doctest::Approx(grid.probs[i % 3]).epsilon(1e-14));
        CHECK(grid.copula_thresholds(i, 1) ==
              doctest::Approx(grid.probs[i / 3]).epsilon(1e-14));
    }
}

TEST_CASE("marginal orthant probabilities") {
    // p=1: quantile roundtrip gives back the probability
    ThresholdGrid g1 = make_threshold_grid(1, 5);
    auto m1 = marginal_orthant_probs(g1, 0.0);
    CHECK(m1[2] == doctest::Approx(0.5).epsilon(1e-12));

    // p=2 at the median threshold: independence product and the arcsin form
    ThresholdGrid g2 = make_threshold_grid(2, 5);
    auto m_indep = marginal_orthant_probs(g2, 0.0);
    auto m_half = marginal_orthant_probs(g2, 0.5);
    // index of (0.5, 0.5): i % 5 == 2 and i / 5 == 2 -> i = 12
    CHECK(m_indep[12] == doctest::Approx(0.25).epsilon(1e-10));
    CHECK(m_half[12] == doctest::Approx(1.0 / 3.0).epsilon(1e-10));
}

TEST_CASE("exact_gamma matches the naive all-pairs oracle (p=1)") {
    const Lattice lat = build_lattice(3);
    const Mat dist = distance_matrix(lat);
    const KernelWeights w = kernel_weights(lat, 0.5, 0.5, 0.5, KernelId::gaussian);
    const ThresholdGrid grid = make_threshold_grid(1, 2);

    const Mat gamma = exact_gamma({0.2, 0.0}, grid, dist, w, 1e-6, 20260301ULL);
    const Mat oracle = oracles::brute_force_gamma_p1(0.2, grid, dist, w);

    REQUIRE(gamma.rows() == oracle.rows());
    for (std::size_t r = 0; r < gamma.rows(); ++r)
        for (std::size_t s = 0; s < gamma.cols(); ++s)
            CHECK(std::fabs(gamma(r, s) - oracle(r, s)) <= 1e-9);
}

TEST_CASE("exact_gamma diagonal entries are nonnegative") {
    const Lattice lat = build_lattice(3);
    const Mat dist = distance_matrix(lat);
    const KernelWeights w = kernel_weights(lat, 0.5, 0.5, 0.4, KernelId::gaussian);
    const ThresholdGrid grid = make_threshold_grid(2, 2);
    const Mat gamma = exact_gamma({0.3, 0.5}, grid, dist, w, 1e-6, 1ULL);
    for (std::size_t r = 0; r < gamma.rows(); ++r) CHECK(gamma(r, r) >= -1e-5);
}

TEST_CASE("exact_gamma is symmetric by construction") {
    const Lattice lat = build_lattice(3);
    const Mat dist = distance_matrix(lat);
    const KernelWeights w = kernel_weights(lat, 0.4, 0.6, 0.4, KernelId::gaussian);
    const ThresholdGrid grid = make_threshold_grid(2, 2);
    const Mat gamma = exact_gamma({0.25, 0.5}, grid, dist, w, 1e-6, 7ULL);
    for (std::size_t r = 0; r < gamma.rows(); ++r)
        for (std::size_t s = 0; s < gamma.cols(); ++s)
            CHECK(gamma(r, s) == gamma(s, r));
}

TEST_CASE("phi -> 0 reduces to the single-site indicator covariance") {
    const Lattice lat = build_lattice(3);
    const Mat dist = distance_matrix(lat);
    const KernelWeights w = kernel_weights(lat, 0.5, 0.5, 0.5, KernelId::gaussian);
    const ThresholdGrid grid = make_threshold_grid(2, 2);
    const double rho = 0.5;
    const double tol = 1e-6;

    const Mat gamma = exact_gamma({1e-6, rho}, grid, dist, w, tol, 20260301ULL);

    const auto marg = marginal_orthant_probs(grid, rho);
    for (std::size_t r = 0; r < grid.size(); ++r) {
        for (std::size_t s = 0; s < grid.size(); ++s) {
            // componentwise-min thresholds under the within-site correlation
            double a = std::min(grid.latent(r, 0), grid.latent(s, 0));
            double b = std::min(grid.latent(r, 1), grid.latent(s, 1));
            double expected = bvn_cdf(a, b, rho) - marg[r] * marg[s];
            CHECK(std::fabs(gamma(r, s) - expected) <= 5.0 * tol);
        }
    }
}

TEST_CASE("satterthwaite on a scaled identity matrix") {
    const double g = 0.37;
    const std::size_t m = 4;
    const int K = 3;
    Mat gamma(m, m);
    for (std::size_t i = 0; i < m; ++i) gamma(i, i) = g;

    SatterthwaiteParams params = satterthwaite_params(gamma, K);
    CHECK(params.eigenvalues.size() == m * static_cast<std::size_t>(K - 1));
    const double lambda = g / (K * static_cast<double>(m));
    for (double v : params.eigenvalues) CHECK(v == doctest::Approx(lambda).epsilon(1e-12));
    CHECK(params.a == doctest::Approx(lambda).epsilon(1e-12));
    CHECK(params.nu == doctest::Approx(static_cast<double>(m * (K - 1))).epsilon(1e-12));
}

TEST_CASE("satterthwaite K=2 diag matches a dense Kronecker eigensolve") {
    Mat gamma(2, 2);
    gamma(0, 0) = 1.0;
    gamma(1, 1) = 2.0;
    const int K = 2;
    SatterthwaiteParams params = satterthwaite_params(gamma, K);

    // dense 4x4 C (x) Gamma
    Mat contrast(2, 2);
    contrast(0, 0) = contrast(1, 1) = 0.5;
    contrast(0, 1) = contrast(1, 0) = -0.5;
    Mat kron(4, 4);
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t c = 0; c < 2; ++c)
                for (std::size_t d = 0; d < 2; ++d)
                    kron(a * 2 + c, b * 2 + d) = contrast(a, b) * gamma(c, d);
    auto dense = symmetric_eigenvalues(kron);
    std::vector<double> dense_retained;
    for (double v : dense)
        if (v > 1e-10) dense_retained.push_back(v / (K * 2.0));
    std::sort(dense_retained.rbegin(), dense_retained.rend());

    REQUIRE(params.eigenvalues.size() == dense_retained.size());
    for (std::size_t i = 0; i < dense_retained.size(); ++i)
        CHECK(params.eigenvalues[i] == doctest::Approx(dense_retained[i]).epsilon(1e-10));
}

TEST_CASE("single retained eigenvalue gives a = lambda and nu = 1") {
    Mat gamma(3, 3);
    gamma(0, 0) = 0.9; // others zero -> filtered
    SatterthwaiteParams params = satterthwaite_params(gamma, 2);
    CHECK(params.eigenvalues.size() == 1);
    CHECK(params.a == doctest::Approx(params.eigenvalues[0]).epsilon(1e-13));
    CHECK(params.nu == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("degenerate calibration raises") {
    Mat gamma(3, 3); // all zero
    CHECK_THROWS_AS(satterthwaite_params(gamma, 3), Error);
}

TEST_CASE("nu never exceeds M(K-1)") {
    NormalStream rng(777);
    for (int trial = 0; trial < 5; ++trial) {
        const std::size_t m = 4;
        Mat root(m, m);
        for (std::size_t i = 0; i < m * m; ++i) root.data()[i] = rng.normal();
        Mat psd(m, m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < m; ++k) s += root(i, k) * root(j, k);
                psd(i, j) = s;
            }
        for (int K : {2, 3, 4}) {
            SatterthwaiteParams params = satterthwaite_params(psd, K);
            CHECK(params.nu <= static_cast<double>(m) * (K - 1) + 1e-9);
            double s1 = 0.0;
            for (double v : params.eigenvalues) s1 += v;
            CHECK(params.a * params.nu == doctest::Approx(s1).epsilon(1e-9));
        }
    }
}

#if defined(SPCVM_HAVE_EIGEN)
TEST_CASE("Kronecker shortcut against Eigen dense eigensolve") {
    NormalStream rng(31337);
    for (int K : {2, 3, 4}) {
        const std::size_t m = 5;
        Mat root(m, m);
        for (std::size_t i = 0; i < m * m; ++i) root.data()[i] = rng.normal();
        Mat psd(m, m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j) {
                double s = 0.0;
                for (std::size_t k = 0; k < m; ++k) s += root(i, k) * root(j, k);
                psd(i, j) = s;
            }

        SatterthwaiteParams params = satterthwaite_params(psd, K);

        const std::size_t km = static_cast<std::size_t>(K) * m;
        Eigen::MatrixXd contrast =
            Eigen::MatrixXd::Identity(K, K) - Eigen::MatrixXd::Constant(K, K, 1.0 / K);
        Eigen::MatrixXd gamma_e(m, m);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                gamma_e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = psd(i, j);
        Eigen::MatrixXd kron(km, km);
        for (int a = 0; a < K; ++a)
            for (int b = 0; b < K; ++b)
                kron.block(a * static_cast<int>(m), b * static_cast<int>(m),
                           static_cast<int>(m), static_cast<int>(m)) = contrast(a, b) * gamma_e;
        kron = 0.5 * (kron + kron.transpose()).eval();
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(kron, Eigen::EigenvaluesOnly);

        std::vector<double> dense;
        for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i) {
            double v = solver.eigenvalues()(i);
            if (v > 1e-10) dense.push_back(v / (static_cast<double>(K) * static_cast<double>(m)));
        }
        std::sort(dense.rbegin(), dense.rend());

        REQUIRE(params.eigenvalues.size() == dense.size());
        for (std::size_t i = 0; i < dense.size(); ++i)
            CHECK(std::fabs(params.eigenvalues[i] - dense[i]) <= 1e-8);

        double s1 = 0.0, s2 = 0.0;
        for (double v : dense) {
            s1 += v;
            s2 += v * v;
        }
        CHECK(std::fabs(params.a - s2 / s1) <= 1e-9);
        CHECK(std::fabs(params.nu - s1 * s1 / s2) <= 1e-9);
    }
}
#endif

TEST_CASE("a and nu are invariant under a permutation of the threshold grid") {
    NormalStream rng(555);
    const std::size_t m = 4;
    Mat root(m, m);
    for (std::size_t i = 0; i < m * m; ++i) root.data()[i] = rng.normal();
    Mat psd(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < m; ++k) s += root(i, k) * root(j, k);
            psd(i, j) = s;
        }
    SatterthwaiteParams base = satterthwaite_params(psd, 3);

    const std::size_t perm[4] = {2, 0, 3, 1};
    Mat permuted(m, m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) permuted(i, j) = psd(perm[i], perm[j]);
    SatterthwaiteParams shuffled = satterthwaite_params(permuted, 3);

    CHECK(shuffled.a == doctest::Approx(base.a).epsilon(1e-11));
    CHECK(shuffled.nu == doctest::Approx(base.nu).epsilon(1e-11));
}

TEST_CASE("calibrate caches and reloads byte-identical results") {
    const std::string dir = (std::filesystem::temp_directory_path() / "spcvm_test_cache").string();
    std::filesystem::remove_all(dir);

    CalibrationConfig config;
    config.grid_size = 3;
    config.p = 1;
    config.m_per_dim = 2;
    config.phi = 0.2;
    config.rho = 0.0;
    config.K = 3;

    CacheStats stats;
    CalibrationResult first = calibrate(config, dir, &stats);
    CHECK(stats.misses == 1);
    CHECK(stats.hits == 0);

    CalibrationResult second = calibrate(config, dir, &stats);
    CHECK(stats.hits == 1);
    CHECK(second.gamma == first.gamma);
    CHECK(second.eigenvalues == first.eigenvalues);
    CHECK(second.a == first.a);
    CHECK(second.nu == first.nu);

    // a different phi keys a different cache entry
    CalibrationConfig other = config;
    other.phi = 0.5;
    CHECK(calibration_cache_key(other) != calibration_cache_key(config));

    std::filesystem::remove_all(dir);
}

TEST_CASE("changing only the seed moves gamma by at most a few tolerances (p=2)") {
    const Lattice lat = build_lattice(2);
    const Mat dist = distance_matrix(lat);
    const KernelWeights w = kernel_weights(lat, 0.5, 0.5, 0.8, KernelId::gaussian);
    const ThresholdGrid grid = make_threshold_grid(2, 2);
    const double tol = 1e-5;

    Mat a = exact_gamma({0.3, 0.5}, grid, dist, w, tol, 1ULL);
    Mat b = exact_gamma({0.3, 0.5}, grid, dist, w, tol, 2ULL);
    double max_diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        max_diff = std::max(max_diff, std::fabs(a.data()[i] - b.data()[i]));
    CHECK(max_diff <= 5.0 * tol);
}
