// Analytic finite-temperature condensate of the continuum massless model:
//   psibar-psi / g = -(1/(2 pi^{3/2})) e^gamma exp(2 I(a)),  a = (1/sqrt(pi)) / (T/g)
//   I(a) = integral_0^inf dt / (1 - e^{a cosh t})
// Independent of the chemical potential.
#ifndef NNIQS_ANALYTIC_HPP
#define NNIQS_ANALYTIC_HPP

#include <cmath>
#include <numbers>
#include <vector>

#include "nniqs/core.hpp"

namespace nniqs::analytic {

// x = a cosh t beyond this is truncated: |integrand| < 1e-20.
inline constexpr double kLogCutoff = 46.0;
inline constexpr double kQuadratureTol = 1e-10;
// Below this, 1 - e^a is all cancellation and the integrand guard underflows.
inline constexpr double kMinA = 1e-12;

namespace detail {

inline double integrand(double a, double t) {
    const double x = a * std::cosh(t);
    if (x > kLogCutoff) return -std::exp(-x); // asymptotic form, avoids overflow
    return 1.0 / (1.0 - std::exp(x));
}

// Adaptive Simpson on [lo, hi], absolute tolerance. Classic 15x error
// estimate from halving; depth cap guards pathological inputs.
template <typename F>
double simpson_rec(const F& f, double lo, double hi, double flo, double fmid, double fhi,
                   double whole, double tol, int depth) {
    const double mid = 0.5 * (lo + hi);
    const double lmid = 0.5 * (lo + mid);
    const double rmid = 0.5 * (mid + hi);
    const double flm = f(lmid);
    const double frm = f(rmid);
    const double left = (mid - lo) / 6.0 * (flo + 4.0 * flm + fmid);
    const double right = (hi - mid) / 6.0 * (fmid + 4.0 * frm + fhi);
    const double delta = left + right - whole;
    if (depth <= 0) throw numeric_error("adaptive_simpson: recursion depth exhausted");
    if (std::fabs(delta) <= 15.0 * tol)
        return left + right + delta / 15.0;
    return simpson_rec(f, lo, mid, flo, flm, fmid, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, mid, hi, fmid, frm, fhi, right, 0.5 * tol, depth - 1);
}

template <typename F>
double adaptive_simpson(const F& f, double lo, double hi, double tol) {
    if (!(hi > lo)) return 0.0;
    const double flo = f(lo);
    const double fhi = f(hi);
    const double fmid = f(0.5 * (lo + hi));
    const double whole = (hi - lo) / 6.0 * (flo + 4.0 * fmid + fhi);
    return simpson_rec(f, lo, hi, flo, fmid, fhi, whole, tol, 48);
}

} // namespace detail

// I(a); strictly negative for finite a > 0, -> 0 as a -> inf.
inline double thermal_integral(double a) {
    if (!(a > 0.0)) throw invariant_error("thermal_integral: a must be positive");
    if (a < kMinA)
        throw numeric_error("thermal_integral: a below integrand guard, temperature out of range");
    if (a >= kLogCutoff) return 0.0; // whole integrand under the truncation floor
    const double t_max = std::acosh(kLogCutoff / a);
    return detail::adaptive_simpson([a](double t) { return detail::integrand(a, t); },
                                    0.0, t_max, kQuadratureTol);
}

// T -> 0 limit, -e^gamma / (2 pi^{3/2}) = -0.15992883...
inline double zero_temperature_condensate() {
    const double pi32 = std::numbers::pi * std::sqrt(std::numbers::pi);
    return -std::exp(std::numbers::egamma) / (2.0 * pi32);
}

inline double analytic_condensate(double t_over_g) {
    if (!(t_over_g > 0.0))
        throw invariant_error("analytic_condensate: temperature must be positive");
    const double a = std::numbers::inv_sqrtpi / t_over_g;
    return zero_temperature_condensate() * std::exp(2.0 * thermal_integral(a));
}

inline std::vector<double> analytic_condensate(const std::vector<double>& t_over_g) {
    std::vector<double> out(t_over_g.size());
    for (std::size_t i = 0; i < t_over_g.size(); ++i) out[i] = analytic_condensate(t_over_g[i]);
    return out;
}

} // namespace nniqs::analytic

#endif
