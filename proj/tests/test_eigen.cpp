// Householder + QL eigensolver against the independent Jacobi oracle and
// structural identities (orthonormality, reconstruction, known spectra).
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <vector>

#include "nniqs/eigen.hpp"
#include "oracles.hpp"

using namespace nniqs;

namespace {

Matrix random_symmetric(std::size_t n, rng::Stream& st) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i; j < n; ++j) m(i, j) = m(j, i) = st.uniform_real(-1.0, 1.0);
    return m;
}

} // namespace

TEST_CASE("eigenvalues match the Jacobi oracle", "[eigen]") {
    rng::Stream st(31337);
    for (std::size_t n : {2, 3, 5, 16, 40}) {
        const Matrix a = random_symmetric(n, st);
        const auto lib = eig::symmetric_eigensolve(a);
        const auto ora = oracle::jacobi_eigensolve(a);
        REQUIRE(lib.eigenvalues.size() == n);
        for (std::size_t k = 0; k < n; ++k)
            REQUIRE(std::fabs(lib.eigenvalues[k] - ora.eigenvalues[k]) < 1e-10);
        for (std::size_t k = 1; k < n; ++k)
            REQUIRE(lib.eigenvalues[k] >= lib.eigenvalues[k - 1]);
    }
}

TEST_CASE("eigenvectors are orthonormal and reconstruct the matrix", "[eigen]") {
    rng::Stream st(404);
    const std::size_t n = 24;
    const Matrix a = random_symmetric(n, st);
    const auto dec = eig::symmetric_eigensolve(a);
    const Matrix& v = dec.eigenvectors;

    for (std::size_t p = 0; p < n; ++p)
        for (std::size_t q = p; q < n; ++q) {
            double dot = 0.0;
            for (std::size_t i = 0; i < n; ++i) dot += v(i, p) * v(i, q);
            REQUIRE(std::fabs(dot - (p == q ? 1.0 : 0.0)) < 1e-11);
        }

    // A = V diag(lambda) V^T entrywise
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                acc += v(i, k) * dec.eigenvalues[k] * v(j, k);
            worst = std::max(worst, std::fabs(acc - a(i, j)));
        }
    REQUIRE(worst < 1e-11);
}

TEST_CASE("known closed-form spectra are reproduced", "[eigen]") {
    // 2x2 [[a, b], [b, c]]: lambda = (a+c)/2 -+ sqrt(((a-c)/2)^2 + b^2)
    Matrix m2(2, 2);
    m2(0, 0) = 3.0;
    m2(1, 1) = -1.0;
    m2(0, 1) = m2(1, 0) = 2.0;
    const auto d2 = eig::symmetric_eigensolve(m2);
    const double mid = 1.0, rad = std::sqrt(4.0 + 4.0);
    REQUIRE(std::fabs(d2.eigenvalues[0] - (mid - rad)) < 1e-13);
    REQUIRE(std::fabs(d2.eigenvalues[1] - (mid + rad)) < 1e-13);

    // tridiagonal free chain: lambda_k = 2 cos(k pi / (n+1))
    const std::size_t n = 12;
    Matrix chain(n, n);
    for (std::size_t i = 0; i + 1 < n; ++i) chain(i, i + 1) = chain(i + 1, i) = 1.0;
    const auto dc = eig::symmetric_eigensolve(chain);
    std::vector<double> want(n);
    for (std::size_t k = 0; k < n; ++k)
        want[k] = 2.0 * std::cos(std::numbers::pi * static_cast<double>(n - k) /
                                 static_cast<double>(n + 1));
    for (std::size_t k = 0; k < n; ++k)
        REQUIRE(std::fabs(dc.eigenvalues[k] - want[k]) < 1e-12);
}

TEST_CASE("degenerate and trivial inputs", "[eigen]") {
    const auto d1 = eig::symmetric_eigensolve(Matrix(1, 1, 4.5));
    REQUIRE(d1.eigenvalues == std::vector<double>{4.5});
    REQUIRE(d1.eigenvectors(0, 0) == 1.0);

    // repeated eigenvalue: identity times a constant
    Matrix scaled(5, 5);
    for (std::size_t i = 0; i < 5; ++i) scaled(i, i) = -2.0;
    const auto dr = eig::symmetric_eigensolve(scaled);
    for (double v : dr.eigenvalues) REQUIRE(std::fabs(v + 2.0) < 1e-14);

    REQUIRE_THROWS_AS(eig::symmetric_eigensolve(Matrix(2, 3)), invariant_error);
    REQUIRE(eig::symmetric_eigensolve(Matrix()).eigenvalues.empty());
}

TEST_CASE("jacobi oracle self-check on a hand spectrum", "[eigen]") {
    // guard the oracle itself: diag(1, 5, 9) rotated by a known orthogonal map
    Matrix a(3, 3);
    const double c = std::cos(0.3), s = std::sin(0.3);
    // Q diag Q^T with Q a Givens rotation in the (0, 2) plane
    const double d0 = 1.0, d1 = 5.0, d2 = 9.0;
    a(0, 0) = c * c * d0 + s * s * d2;
    a(2, 2) = s * s * d0 + c * c * d2;
    a(0, 2) = a(2, 0) = c * s * (d2 - d0);
    a(1, 1) = d1;
    const auto dec = oracle::jacobi_eigensolve(a);
    REQUIRE(std::fabs(dec.eigenvalues[0] - d0) < 1e-12);
    REQUIRE(std::fabs(dec.eigenvalues[1] - d1) < 1e-12);
    REQUIRE(std::fabs(dec.eigenvalues[2] - d2) < 1e-12);
}
