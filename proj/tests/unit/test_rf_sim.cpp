#include "spcvm/rf_sim.hpp"

#include "spcvm/errors.hpp"
#include "spcvm/io.hpp"
#include "spcvm/parallel.hpp"
#include "spcvm/rng.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace spcvm;

TEST_CASE("site covariance blocks") {
    Lattice lat = build_lattice(2);
    Mat dist = distance_matrix(lat);

    SUBCASE("d = 0 block is the within-site correlation") {
        Mat sigma = build_site_covariance(dist, 1.0, 0.5, 2);
        CHECK(sigma(0, 0) == doctest::Approx(1.0));
        CHECK(sigma(0, 1) == doctest::Approx(0.5));
        CHECK(sigma(1, 0) == doctest::Approx(0.5));
        CHECK(sigma(1, 1) == doctest::Approx(1.0));
    }

    SUBCASE("phi -> 0 gives block diagonal") {
        Mat sigma = build_site_covariance(dist, 1e-8, 0.5, 2);
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t j = 2; j < 8; ++j) CHECK(sigma(i, j) == doctest::Approx(0.0));
    }

    SUBCASE("p = 1 entries are the exponential correlation") {
        Mat sigma = build_site_covariance(dist, 1.0, 0.0, 1);
        CHECK(sigma(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-14));
        CHECK(sigma(0, 3) == doctest::Approx(std::exp(-std::sqrt(2.0))).epsilon(1e-14));
        CHECK(sigma(0, 0) == doctest::Approx(1.0));
    }
}

TEST_CASE("jittered Cholesky of the identity") {
    Mat eye(5, 5);
    for (std::size_t i = 0; i < 5; ++i) eye(i, i) = 1.0;
    Mat chol = cholesky_jittered(eye);
    for (std::size_t i = 0; i < 5; ++i) {
        CHECK(chol(i, i) == doctest::Approx(std::sqrt(1.0 + 1e-8)).epsilon(1e-12));
        for (std::size_t j = i + 1; j < 5; ++j) CHECK(chol(i, j) == 0.0);
    }
}

TEST_CASE("Cholesky reconstruction on a random SPD matrix") {
    NormalStream rng(808);
    const std::size_t n = 10;
    Mat root(n, n);
    for (std::size_t i = 0; i < n * n; ++i) root.data()[i] = rng.normal();
    Mat spd(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += root(i, k) * root(j, k);
            spd(i, j) = s + (i == j ? 0.5 : 0.0);
        }

    Mat chol = cholesky_jittered(spd);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < n; ++k) s += chol(i, k) * chol(j, k);
            double expected = spd(i, j) + (i == j ? 1e-8 : 0.0);
            CHECK(std::fabs(s - expected) <= 1e-7);
        }
}

TEST_CASE("2x2 Cholesky closed form") {
    Mat m(2, 2);
    m(0, 0) = m(1, 1) = 1.0;
    m(0, 1) = m(1, 0) = 0.5;
    Mat chol = cholesky_jittered(m);
    CHECK(chol(0, 0) == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(chol(1, 0) == doctest::Approx(0.5).epsilon(1e-7));
    CHECK(chol(1, 1) == doctest::Approx(std::sqrt(0.75)).epsilon(1e-7));
}

TEST_CASE("Cholesky failure raises") {
    Mat m(2, 2);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    m(0, 1) = m(1, 0) = 2.0; // indefinite
    CHECK_THROWS_AS(cholesky_jittered(m), Error);
}

TEST_CASE("simulated fields are strictly positive and reproducible") {
    Lattice lat = build_lattice(4);
    Mat sigma = build_site_covariance(distance_matrix(lat), 0.2, 0.5, 2);
    Mat chol = cholesky_jittered(sigma);

    FieldDataset a = simulate_fields(chol, lat, 3, 0.15, 42, 2);
    CHECK(a.K() == 3);
    CHECK(a.n() == 16);
    CHECK(a.p() == 2);
    for (const Mat& f : a.fields)
        for (std::size_t i = 0; i < f.size(); ++i) CHECK(f.data()[i] > 0.0);

    FieldDataset b = simulate_fields(chol, lat, 3, 0.15, 42, 2);
    for (int k = 0; k < 3; ++k) CHECK(a.fields[static_cast<std::size_t>(k)] == b.fields[static_cast<std::size_t>(k)]);

    FieldDataset c = simulate_fields(chol, lat, 3, 0.15, 43, 2);
    CHECK(a.fields[0] != c.fields[0]);
}

TEST_CASE("the shift multiplies field 1 only") {
    Lattice lat = build_lattice(3);
    Mat sigma = build_site_covariance(distance_matrix(lat), 0.2, 0.0, 1);
    Mat chol = cholesky_jittered(sigma);

    FieldDataset null_data = simulate_fields(chol, lat, 2, 0.0, 7, 1);
    FieldDataset shifted = simulate_fields(chol, lat, 2, 0.4, 7, 1);
    // same streams: field 0 scales by exp(delta), field 1 unchanged
    for (std::size_t i = 0; i < null_data.fields[0].size(); ++i) {
        CHECK(shifted.fields[0].data()[i] ==
              doctest::Approx(null_data.fields[0].data()[i] * std::exp(0.4)).epsilon(1e-12));
        CHECK(shifted.fields[1].data()[i] == null_data.fields[1].data()[i]);
    }
}

TEST_CASE("log-normal mean under near-independence") {
    // E exp(N(0, 1)) = exp(1/2); 10^5 draws, tolerance 0.02
    Lattice lat = build_lattice(10);
    Mat sigma = build_site_covariance(distance_matrix(lat), 0.01, 0.0, 1);
    Mat chol = cholesky_jittered(sigma);

    double sum = 0.0;
    std::size_t count = 0;
    for (int rep = 0; rep < 1000; ++rep) {
        FieldDataset d = simulate_fields(chol, lat, 1, 0.0, mix_seed(999, rep), 1);
        for (std::size_t i = 0; i < d.fields[0].size(); ++i) {
            sum += d.fields[0].data()[i];
            ++count;
        }
    }
    CHECK(count == 100000);
    CHECK(sum / static_cast<double>(count) == doctest::Approx(std::exp(0.5)).epsilon(0.02));
}

TEST_CASE("monte_carlo is deterministic and thread-count independent") {
    SimulationConfig config;
    config.K = 3;
    config.grid_size = 4;
    config.p = 1;
    config.n_replicates = 6;
    config.phis = {0.2};
    config.deltas = {0.0, 0.4};
    config.m_per_dim = 2;
    config.rho = 0.0;
    config.seed = 4242;

    const unsigned saved = max_threads();
    set_max_threads(1);
    ResultsTable serial = monte_carlo(config);
    set_max_threads(4);
    ResultsTable threaded = monte_carlo(config);
    set_max_threads(saved);

    CHECK(results_csv_string(serial) == results_csv_string(threaded));

    // one row per (phi, delta, method)
    CHECK(serial.rows.size() == 1 * 2 * 3);
    for (const ResultsRow& row : serial.rows) {
        CHECK(row.n_effective == 6);
        CHECK(row.rejection_rate >= 0.0);
        CHECK(row.rejection_rate <= 1.0);
    }
}

TEST_CASE("monte_carlo passes per-cell p-values to the observer") {
    SimulationConfig config;
    config.K = 2;
    config.grid_size = 3;
    config.p = 1;
    config.n_replicates = 3;
    config.phis = {0.3};
    config.deltas = {0.0};
    config.m_per_dim = 2;
    config.rho = 0.0;
    config.seed = 11;

    int cells = 0;
    monte_carlo(config, "", nullptr, [&](const CellPvalues& cell) {
        ++cells;
        CHECK(cell.p_values.rows() == 3);
        CHECK(cell.p_values.cols() == cell.methods.size());
        for (std::size_t i = 0; i < cell.p_values.size(); ++i) {
            CHECK(cell.p_values.data()[i] >= 0.0);
            CHECK(cell.p_values.data()[i] <= 1.0);
        }
    });
    CHECK(cells == 1);
}
