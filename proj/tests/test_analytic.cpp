// Continuum condensate formula: frozen high-precision constants, agreement
// with the fixed-step quadrature oracle, asymptotics and guards.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "nniqs/analytic.hpp"
#include "oracles.hpp"

using namespace nniqs;

// 30-digit reference values computed with an arbitrary-precision evaluation
// of I(a) and the condensate formula, frozen here.
namespace {
constexpr double kI_05 = -1.81621950060941570074987443561;
constexpr double kI_1 = -0.586402163033907171823402023556;
constexpr double kI_2 = -0.126464311015581842190953925578;
constexpr double kZeroT = -0.159928834921685695528957394756;
constexpr double kCondHalf = -0.0629651367670881356794825765817; // T/g = 0.5
} // namespace

TEST_CASE("thermal integral reproduces frozen references", "[analytic]") {
    REQUIRE(std::fabs(analytic::thermal_integral(0.5) - kI_05) < 1e-10);
    REQUIRE(std::fabs(analytic::thermal_integral(1.0) - kI_1) < 1e-10);
    REQUIRE(std::fabs(analytic::thermal_integral(2.0) - kI_2) < 1e-10);
}

TEST_CASE("thermal integral matches the composite Simpson oracle", "[analytic]") {
    for (double a : {0.3, 1.0, 3.7}) {
        const double t_max = std::acosh(analytic::kLogCutoff / a);
        const double brute = oracle::simpson_fixed(
            [a](double t) { return analytic::detail::integrand(a, t); }, 0.0, t_max,
            std::size_t{1} << 18);
        REQUIRE(std::fabs(analytic::thermal_integral(a) - brute) < 1e-9);
    }
}

TEST_CASE("thermal integral ordering and tail truncation", "[analytic]") {
    // strictly negative, increasing toward 0 with a
    REQUIRE(kI_05 < kI_1);
    REQUIRE(kI_1 < kI_2);
    REQUIRE(analytic::thermal_integral(10.0) < 0.0);
    REQUIRE(analytic::thermal_integral(46.0) == 0.0);
    REQUIRE(analytic::thermal_integral(100.0) == 0.0);
}

TEST_CASE("thermal integral guards", "[analytic]") {
    REQUIRE_THROWS_AS(analytic::thermal_integral(0.0), invariant_error);
    REQUIRE_THROWS_AS(analytic::thermal_integral(-1.0), invariant_error);
    REQUIRE_THROWS_AS(analytic::thermal_integral(1e-13), numeric_error);
}

TEST_CASE("zero-temperature limit constant", "[analytic]") {
    REQUIRE(std::fabs(analytic::zero_temperature_condensate() - kZeroT) < 1e-15);
}

TEST_CASE("condensate value and limits", "[analytic]") {
    REQUIRE(std::fabs(analytic::analytic_condensate(0.5) - kCondHalf) < 1e-10);

    // cold side converges onto the T -> 0 constant
    const double cold = analytic::analytic_condensate(0.04);
    REQUIRE(std::fabs(cold - kZeroT) < 1e-6);

    // hot side decays toward zero monotonically
    const double warm = analytic::analytic_condensate(1.0);
    const double hot = analytic::analytic_condensate(2.5);
    REQUIRE(warm < 0.0);
    REQUIRE(hot < 0.0);
    REQUIRE(std::fabs(hot) < std::fabs(warm));
    REQUIRE(std::fabs(warm) < std::fabs(kZeroT));

    REQUIRE_THROWS_AS(analytic::analytic_condensate(0.0), invariant_error);
    REQUIRE_THROWS_AS(analytic::analytic_condensate(-0.3), invariant_error);
}

TEST_CASE("vector form matches scalar calls", "[analytic]") {
    const std::vector<double> ts{0.1, 0.5, 1.7, 2.5};
    const auto vals = analytic::analytic_condensate(ts);
    REQUIRE(vals.size() == ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i)
        REQUIRE(vals[i] == analytic::analytic_condensate(ts[i]));
}
