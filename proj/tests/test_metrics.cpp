// Metrics: PSNR anchor values, relative-error map semantics including the
// denominator floor, quantiles and IQR trimming against the sort oracle.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <vector>

#include "nniqs/dataset.hpp"
#include "nniqs/metrics.hpp"
#include "oracles.hpp"

using namespace nniqs;

TEST_CASE("psnr anchors", "[metrics]") {
    Matrix truth(4, 4, 0.0);
    Matrix pred(4, 4, 0.1);
    // 20 dB up to the binary quantization of the 0.1 input itself
    REQUIRE(std::fabs(metrics::psnr(pred, truth) - 20.0) < 1e-13);

    // halving the difference adds 10 log10(4) ~ 6.0206 dB
    Matrix half(4, 4, 0.05);
    REQUIRE(std::fabs(metrics::psnr(half, truth) - 20.0 - 20.0 * std::log10(2.0)) < 1e-12);

    // identical inputs hit the cap
    REQUIRE(metrics::psnr(truth, truth) == metrics::kPsnrCap);

    REQUIRE_THROWS_AS(metrics::psnr(Matrix(2, 2), Matrix(2, 3)), invariant_error);
    REQUIRE_THROWS_AS(metrics::psnr(Matrix(), Matrix()), invariant_error);

    // vector overload mirrors the matrix one
    const std::vector<double> a{0.2, 0.4, 0.6};
    const std::vector<double> b{0.25, 0.35, 0.65};
    Matrix ma(1, 3), mb(1, 3);
    for (int i = 0; i < 3; ++i) {
        ma[i] = a[i];
        mb[i] = b[i];
    }
    REQUIRE(metrics::psnr(a, b) == metrics::psnr(ma, mb));
}

TEST_CASE("relative errors are computed in physical units", "[metrics]") {
    // physical pair (g = -0.5, p = -0.45): rel err = 0.05 / 0.5 = 0.1
    Matrix pred(1, 2), truth(1, 2);
    pred[0] = data::to_model_space(-0.45);
    truth[0] = data::to_model_space(-0.5);
    pred[1] = data::to_model_space(1.2);
    truth[1] = data::to_model_space(1.0);
    const auto m = metrics::relative_error_map(pred, truth);
    REQUIRE(m.floored == 0);
    REQUIRE(std::fabs(m.errors[0] - 0.1) < 1e-12);
    REQUIRE(std::fabs(m.errors[1] - 0.2) < 1e-12);
}

TEST_CASE("relative error denominator is floored at tiny truth values", "[metrics]") {
    Matrix pred(1, 1), truth(1, 1);
    truth[0] = 0.5; // physical value exactly 0
    pred[0] = data::to_model_space(1e-6);
    const auto m = metrics::relative_error_map(pred, truth);
    REQUIRE(m.floored == 1);
    // quotient is ~100; slack covers the sigmoid/logit round-trip of 1e-6
    REQUIRE(std::fabs(m.errors[0] - 1e-6 / metrics::kRelErrFloor) < 1e-6);

    REQUIRE_THROWS_AS(metrics::relative_error_map(Matrix(1, 2), Matrix(2, 1)),
                      invariant_error);
}

TEST_CASE("quantiles match the rank-interpolation oracle", "[metrics]") {
    rng::Stream st(808);
    for (std::size_t n : {1, 2, 3, 7, 50, 101}) {
        std::vector<double> vals(n);
        for (auto& v : vals) v = st.uniform_real(-3.0, 9.0);
        std::vector<double> sorted = vals;
        std::sort(sorted.begin(), sorted.end());
        for (double q : {0.0, 0.25, 0.5, 0.75, 1.0}) {
            const double lib = metrics::quantile_sorted(sorted, q);
            const double ora = oracle::quantile_by_rank(vals, q);
            REQUIRE(std::fabs(lib - ora) < 1e-12);
        }
    }
    REQUIRE_THROWS_AS(metrics::quantile_sorted({}, 0.5), invariant_error);
}

TEST_CASE("outlier-free data is kept whole", "[metrics]") {
    Matrix errors(1, 8);
    for (std::size_t i = 0; i < 8; ++i) errors[i] = 0.1 + 0.01 * static_cast<double>(i);
    const auto r = metrics::region_stats(errors);
    REQUIRE(r.mask_kind == "whole");
    REQUIRE(r.total_count == 8);
    REQUIRE(r.trimmed_count == 0);
    REQUIRE(std::fabs(r.mean - 0.135) < 1e-12);
    REQUIRE(r.max_after_trim == errors[7]);
    REQUIRE(r.q1 <= r.median);
    REQUIRE(r.median <= r.q3);
}

TEST_CASE("iqr trimming matches the sort-based oracle", "[metrics]") {
    rng::Stream st(909);
    for (int rep = 0; rep < 10; ++rep) {
        std::vector<double> vals(200);
        for (auto& v : vals) v = st.uniform_real(0.0, 1.0);
        // plant outliers on both sides
        vals[3] = 50.0;
        vals[17] = 120.0;
        vals[90] = -40.0;

        Matrix errors(1, vals.size());
        for (std::size_t i = 0; i < vals.size(); ++i) errors[i] = vals[i];
        const auto lib = metrics::region_stats(errors);
        const auto ora = oracle::iqr_trim(vals);

        REQUIRE(lib.total_count == vals.size());
        REQUIRE(lib.trimmed_count == ora.trimmed);
        REQUIRE(lib.trimmed_count >= 3);
        REQUIRE(std::fabs(lib.mean - ora.mean) < 1e-12);
        REQUIRE(std::fabs(lib.median - ora.median) < 1e-12);
        REQUIRE(lib.max_after_trim == ora.kept.back());
    }
}

TEST_CASE("masked statistics select the masked subset only", "[metrics]") {
    Matrix errors(2, 3);
    for (std::size_t i = 0; i < 6; ++i) errors[i] = static_cast<double>(i);
    std::vector<std::uint8_t> mask{0, 1, 0, 1, 0, 1}; // values 1, 3, 5
    const auto r = metrics::region_stats(errors, mask, "transition");
    REQUIRE(r.mask_kind == "transition");
    REQUIRE(r.total_count == 3);
    REQUIRE(std::fabs(r.mean - 3.0) < 1e-15);
    REQUIRE(std::fabs(r.median - 3.0) < 1e-15);

    std::vector<std::uint8_t> bad_mask{1, 1};
    REQUIRE_THROWS_AS(metrics::region_stats(errors, bad_mask, "x"), invariant_error);
    std::vector<std::uint8_t> empty_mask(6, 0);
    REQUIRE_THROWS_AS(metrics::region_stats(errors, empty_mask, "x"), invariant_error);
}

TEST_CASE("non-finite entries are excluded before trimming", "[metrics]") {
    Matrix errors(1, 5);
    errors[0] = 0.1;
    errors[1] = std::numeric_limits<double>::infinity();
    errors[2] = 0.2;
    errors[3] = std::nan("");
    errors[4] = 0.3;
    const auto r = metrics::region_stats(errors);
    REQUIRE(r.total_count == 3);
    REQUIRE(std::fabs(r.mean - 0.2) < 1e-15);
}
