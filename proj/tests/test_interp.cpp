// Classical interpolators: node exactness, polynomial reproduction classes,
// hand-computed spline values, hull and uniformity guards, grid/point parity.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "nniqs/core.hpp"
#include "nniqs/interp.hpp"

using namespace nniqs;

namespace {

Matrix sample_grid(const std::vector<double>& ts, const std::vector<double>& mus,
                   double (*f)(double, double)) {
    Matrix g(ts.size(), mus.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
        for (std::size_t j = 0; j < mus.size(); ++j) g(i, j) = f(ts[i], mus[j]);
    return g;
}

const std::vector<double> kUniformT{0.0, 0.5, 1.0, 1.5, 2.0, 2.5};
const std::vector<double> kUniformMu{0.0, 0.25, 0.5, 0.75, 1.0};
const std::vector<double> kRaggedT{0.0, 0.3, 0.45, 1.1, 2.0};
const std::vector<double> kRaggedMu{0.0, 0.2, 0.9, 1.4};

} // namespace

TEST_CASE("method names parse", "[interp]") {
    REQUIRE(interp::parse_method("bilinear") == interp::Method::Bilinear);
    REQUIRE(interp::parse_method("axiscubic") == interp::Method::AxisCubic);
    REQUIRE(interp::parse_method("bicubic") == interp::Method::Bicubic);
    REQUIRE_THROWS_AS(interp::parse_method("nearest"), invariant_error);
}

TEST_CASE("all methods are node-exact", "[interp]") {
    auto f = [](double t, double mu) { return std::sin(3.0 * t) + std::cos(2.0 * mu); };
    const Matrix grid = sample_grid(kUniformT, kUniformMu, f);
    for (auto method : {interp::Method::Bilinear, interp::Method::AxisCubic,
                        interp::Method::Bicubic}) {
        const Matrix up =
            interp::upscale_grid(grid, kUniformT, kUniformMu, method, kUniformT, kUniformMu);
        for (std::size_t i = 0; i < grid.size(); ++i) REQUIRE(up[i] == grid[i]);
    }
}

TEST_CASE("bilinear reproduces globally bilinear functions", "[interp]") {
    auto f = [](double t, double mu) { return 2.0 + 3.0 * t - mu + 0.5 * t * mu; };
    const Matrix grid = sample_grid(kRaggedT, kRaggedMu, f);
    rng::Stream st(11);
    for (int k = 0; k < 200; ++k) {
        const double t = st.uniform_real(kRaggedT.front(), kRaggedT.back());
        const double mu = st.uniform_real(kRaggedMu.front(), kRaggedMu.back());
        const double got = interp::interpolate_point(grid, kRaggedT, kRaggedMu,
                                                     interp::Method::Bilinear, t, mu);
        REQUIRE(std::fabs(got - f(t, mu)) < 1e-12);
    }
}

TEST_CASE("axis-cubic splines reproduce linear fields on ragged axes", "[interp]") {
    auto f = [](double t, double mu) { return 1.5 - 0.7 * t + 2.2 * mu; };
    const Matrix grid = sample_grid(kRaggedT, kRaggedMu, f);
    rng::Stream st(12);
    for (int k = 0; k < 100; ++k) {
        const double t = st.uniform_real(kRaggedT.front(), kRaggedT.back());
        const double mu = st.uniform_real(kRaggedMu.front(), kRaggedMu.back());
        const double got = interp::interpolate_point(grid, kRaggedT, kRaggedMu,
                                                     interp::Method::AxisCubic, t, mu);
        REQUIRE(std::fabs(got - f(t, mu)) < 1e-12);
    }
}

TEST_CASE("bicubic convolution reproduces quadratics away from edges", "[interp]") {
    auto f = [](double t, double mu) {
        return (t - 0.3) * (t - 0.3) + 2.0 * (mu + 0.1) * (mu + 0.1) + t * mu;
    };
    const Matrix grid = sample_grid(kUniformT, kUniformMu, f);
    rng::Stream st(13);
    for (int k = 0; k < 100; ++k) {
        // stay one full cell away from each boundary so stencils never clamp
        const double t = st.uniform_real(kUniformT[1], kUniformT[4]);
        const double mu = st.uniform_real(kUniformMu[1], kUniformMu[3]);
        const double got = interp::interpolate_point(grid, kUniformT, kUniformMu,
                                                     interp::Method::Bicubic, t, mu);
        REQUIRE(std::fabs(got - f(t, mu)) < 1e-12);
    }
}

TEST_CASE("natural spline hand value and boundary conditions", "[interp]") {
    // knots (0,0), (1,1), (2,0): interior second derivative solves to -3,
    // so s(0.5) = 0.5 + (0.125 - 0.5)(-3)/6 = 0.6875
    interp::NaturalSpline s({0.0, 1.0, 2.0}, {0.0, 1.0, 0.0});
    REQUIRE(std::fabs(s(0.5) - 0.6875) < 1e-15);
    REQUIRE(s(0.0) == 0.0);
    REQUIRE(s(1.0) == 1.0);
    REQUIRE(s(2.0) == 0.0);
    // symmetry of the configuration
    REQUIRE(std::fabs(s(0.25) - s(1.75)) < 1e-15);

    // two knots degrade to the connecting line
    interp::NaturalSpline line({1.0, 3.0}, {2.0, -4.0});
    REQUIRE(std::fabs(line(2.0) - (-1.0)) < 1e-15);

    REQUIRE_THROWS_AS(interp::NaturalSpline({1.0}, {2.0}), invariant_error);
    REQUIRE_THROWS_AS(interp::NaturalSpline({1.0, 1.0}, {2.0, 3.0}), invariant_error);
    REQUIRE_THROWS_AS(interp::NaturalSpline({1.0, 2.0}, {2.0}), invariant_error);
}

TEST_CASE("queries outside the hull are rejected", "[interp]") {
    auto f = [](double t, double mu) { return t + mu; };
    const Matrix grid = sample_grid(kUniformT, kUniformMu, f);
    for (auto method : {interp::Method::Bilinear, interp::Method::AxisCubic,
                        interp::Method::Bicubic}) {
        REQUIRE_THROWS_AS(interp::interpolate_point(grid, kUniformT, kUniformMu, method,
                                                    -0.1, 0.5),
                          invariant_error);
        REQUIRE_THROWS_AS(interp::interpolate_point(grid, kUniformT, kUniformMu, method, 1.0,
                                                    1.01),
                          invariant_error);
    }
}

TEST_CASE("bicubic requires uniform axes", "[interp]") {
    auto f = [](double t, double mu) { return t * mu; };
    const Matrix grid = sample_grid(kRaggedT, kRaggedMu, f);
    REQUIRE_THROWS_AS(interp::interpolate_point(grid, kRaggedT, kRaggedMu,
                                                interp::Method::Bicubic, 0.5, 0.5),
                      invariant_error);
}

TEST_CASE("grid upscale equals pointwise queries", "[interp]") {
    auto f = [](double t, double mu) { return std::sin(t) * std::exp(-mu) + 0.3 * mu; };
    const Matrix grid = sample_grid(kUniformT, kUniformMu, f);
    std::vector<double> tt, tm;
    for (int i = 0; i < 9; ++i) tt.push_back(0.1 + 0.29 * i);
    for (int j = 0; j < 7; ++j) tm.push_back(0.05 + 0.15 * j);
    for (auto method : {interp::Method::Bilinear, interp::Method::AxisCubic,
                        interp::Method::Bicubic}) {
        const Matrix up = interp::upscale_grid(grid, kUniformT, kUniformMu, method, tt, tm);
        REQUIRE(up.rows() == tt.size());
        REQUIRE(up.cols() == tm.size());
        for (std::size_t i = 0; i < tt.size(); ++i)
            for (std::size_t j = 0; j < tm.size(); ++j)
                REQUIRE(up(i, j) == interp::interpolate_point(grid, kUniformT, kUniformMu,
                                                              method, tt[i], tm[j]));
    }
}

TEST_CASE("upscale accepts repeated targets and rejects empty or outside ones", "[interp]") {
    auto f = [](double t, double mu) { return t - mu; };
    const Matrix grid = sample_grid(kUniformT, kUniformMu, f);
    const std::vector<double> rep{0.5, 0.5, 0.5};
    const Matrix up = interp::upscale_grid(grid, kUniformT, kUniformMu,
                                           interp::Method::Bilinear, rep, rep);
    for (double v : up) REQUIRE(v == up[0]);

    REQUIRE_THROWS_AS(interp::upscale_grid(grid, kUniformT, kUniformMu,
                                           interp::Method::Bilinear, {}, rep),
                      invariant_error);
    REQUIRE_THROWS_AS(interp::upscale_grid(grid, kUniformT, kUniformMu,
                                           interp::Method::Bilinear, {3.0}, rep),
                      invariant_error);
}

TEST_CASE("grid shape must match axes", "[interp]") {
    REQUIRE_THROWS_AS(interp::interpolate_point(Matrix(3, 3), kUniformT, kUniformMu,
                                                interp::Method::Bilinear, 0.5, 0.5),
                      invariant_error);
}
