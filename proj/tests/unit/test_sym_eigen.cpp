#include "spcvm/sym_eigen.hpp"

#include "spcvm/rng.hpp"

#include <doctest.h>

#if defined(SPCVM_HAVE_EIGEN)
#include <Eigen/Dense>
#endif

#include <cmath>

using namespace spcvm;

TEST_CASE("diagonal matrix eigenvalues") {
    Mat a(3, 3);
    a(0, 0) = 2.0;
    a(1, 1) = -1.0;
    a(2, 2) = 5.0;
    auto eigs = symmetric_eigenvalues(a);
    CHECK(eigs[0] == doctest::Approx(5.0).epsilon(1e-13));
    CHECK(eigs[1] == doctest::Approx(2.0).epsilon(1e-13));
    CHECK(eigs[2] == doctest::Approx(-1.0).epsilon(1e-13));
}

TEST_CASE("2x2 closed form") {
    Mat a(2, 2);
    a(0, 0) = 1.0;
    a(1, 1) = 1.0;
    a(0, 1) = a(1, 0) = 0.5;
    auto eigs = symmetric_eigenvalues(a);
    CHECK(eigs[0] == doctest::Approx(1.5).epsilon(1e-13));
    CHECK(eigs[1] == doctest::Approx(0.5).epsilon(1e-13));
}

TEST_CASE("trace and Frobenius norm are preserved") {
    NormalStream rng(4242);
    for (std::size_t n : {4, 9, 25}) {
        Mat a(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                double v = rng.normal();
                a(i, j) = v;
                a(j, i) = v;
            }
        auto eigs = symmetric_eigenvalues(a);
        double trace = 0.0, frob = 0.0, eig_sum = 0.0, eig_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            trace += a(i, i);
            for (std::size_t j = 0; j < n; ++j) frob += a(i, j) * a(i, j);
        }
        for (double e : eigs) {
            eig_sum += e;
            eig_sq += e * e;
        }
        CHECK(eig_sum == doctest::Approx(trace).epsilon(1e-11));
        CHECK(eig_sq == doctest::Approx(frob).epsilon(1e-11));
    }
}

#if defined(SPCVM_HAVE_EIGEN)
TEST_CASE("matches Eigen's SelfAdjointEigenSolver") {
    NormalStream rng(9001);
    for (std::size_t n : {3, 6, 12, 30}) {
        Mat a(n, n);
        Eigen::MatrixXd e(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i; j < n; ++j) {
                double v = rng.normal();
                a(i, j) = v;
                a(j, i) = v;
                e(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
                e(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = v;
            }
        auto mine = symmetric_eigenvalues(a);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(e, Eigen::EigenvaluesOnly);
        Eigen::VectorXd ref = solver.eigenvalues();
        for (std::size_t i = 0; i < n; ++i) {
            // Eigen sorts ascending, ours descends
            CHECK(mine[i] ==
                  doctest::Approx(ref(static_cast<Eigen::Index>(n - 1 - i))).epsilon(1e-10));
        }
    }
}
#endif
