// Classical interpolation benchmarks over rectangular grids: bilinear,
// per-axis natural cubic splines (mu pass first, then T), and separable
// cubic-convolution bicubic. Pure grid functions; callers choose the value
// space. None of them extrapolate: queries outside the axis hull are errors.
#ifndef NNIQS_INTERP_HPP
#define NNIQS_INTERP_HPP

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "nniqs/core.hpp"
#include "nniqs/tensor.hpp"

namespace nniqs::interp {

enum class Method { Bilinear, AxisCubic, Bicubic };

inline Method parse_method(const std::string& name) {
    if (name == "bilinear") return Method::Bilinear;
    if (name == "axiscubic") return Method::AxisCubic;
    if (name == "bicubic") return Method::Bicubic;
    throw invariant_error("unknown interpolation method: " + name);
}

namespace detail {

inline void check_axis(const std::vector<double>& x, const char* name) {
    if (x.size() < 2) throw invariant_error(std::string(name) + ": need at least 2 points");
    for (std::size_t i = 1; i < x.size(); ++i)
        if (x[i] <= x[i - 1])
            throw invariant_error(std::string(name) + ": axis must be strictly increasing");
}

// Index of the cell [x[j], x[j+1]] containing q; q must be inside the hull.
inline std::size_t locate(const std::vector<double>& x, double q, const char* name) {
    if (q < x.front() || q > x.back())
        throw invariant_error(std::string(name) + ": query outside interpolation hull");
    auto it = std::upper_bound(x.begin(), x.end(), q);
    std::size_t j = static_cast<std::size_t>(it - x.begin());
    if (j > 0) --j;
    if (j >= x.size() - 1) j = x.size() - 2;
    return j;
}

} // namespace detail

// Natural cubic spline through (x_i, y_i); second derivatives solved once by
// the Thomas algorithm, zero curvature at both ends. n = 2 degrades to the
// connecting line.
class NaturalSpline {
  public:
    NaturalSpline(const std::vector<double>& x, const std::vector<double>& y) : x_(x), y_(y) {
        detail::check_axis(x, "NaturalSpline");
        if (x.size() != y.size()) throw invariant_error("NaturalSpline: length mismatch");
        const std::size_t n = x.size();
        m_.assign(n, 0.0);
        if (n > 2) {
            std::vector<double> diag(n, 0.0), rhs(n, 0.0), upper(n, 0.0);
            for (std::size_t i = 1; i + 1 < n; ++i) {
                const double h0 = x[i] - x[i - 1];
                const double h1 = x[i + 1] - x[i];
                diag[i] = 2.0 * (h0 + h1);
                upper[i] = h1;
                rhs[i] = 6.0 * ((y[i + 1] - y[i]) / h1 - (y[i] - y[i - 1]) / h0);
            }
            // forward elimination over rows 2..n-2 (lower entry of row i is h0)
            for (std::size_t i = 2; i + 1 < n; ++i) {
                const double h0 = x[i] - x[i - 1];
                const double f = h0 / diag[i - 1];
                diag[i] -= f * upper[i - 1];
                rhs[i] -= f * rhs[i - 1];
            }
            for (std::size_t i = n - 2; i >= 1; --i) {
                m_[i] = (rhs[i] - upper[i] * m_[i + 1]) / diag[i];
                if (i == 1) break;
            }
        }
    }

    double operator()(double q) const {
        const std::size_t j = detail::locate(x_, q, "NaturalSpline");
        const double h = x_[j + 1] - x_[j];
        const double a = (x_[j + 1] - q) / h;
        const double b = (q - x_[j]) / h;
        return a * y_[j] + b * y_[j + 1] +
               ((a * a * a - a) * m_[j] + (b * b * b - b) * m_[j + 1]) * h * h / 6.0;
    }

  private:
    std::vector<double> x_, y_, m_;
};

namespace detail {

inline double bilinear_point(const Matrix& grid, const std::vector<double>& ts,
                             const std::vector<double>& mus, double t, double mu) {
    const std::size_t i = locate(ts, t, "bilinear T");
    const std::size_t j = locate(mus, mu, "bilinear mu");
    const double ft = (t - ts[i]) / (ts[i + 1] - ts[i]);
    const double fm = (mu - mus[j]) / (mus[j + 1] - mus[j]);
    return (1.0 - ft) * ((1.0 - fm) * grid(i, j) + fm * grid(i, j + 1)) +
           ft * ((1.0 - fm) * grid(i + 1, j) + fm * grid(i + 1, j + 1));
}

// Keys cubic-convolution kernel, shape parameter a = -0.5.
inline double keys_kernel(double s) {
    constexpr double a = -0.5;
    s = std::fabs(s);
    if (s <= 1.0) return ((a + 2.0) * s - (a + 3.0)) * s * s + 1.0;
    if (s < 2.0) return (((s - 5.0) * s + 8.0) * s - 4.0) * a;
    return 0.0;
}

inline void require_uniform(const std::vector<double>& x, const char* name) {
    const double h = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
    for (std::size_t i = 1; i < x.size(); ++i)
        if (std::fabs((x[i] - x[i - 1]) - h) > 1e-9 * std::max(1.0, std::fabs(h)))
            throw invariant_error(std::string(name) +
                                  ": bicubic convolution requires a uniform axis");
}

inline double bicubic_point(const Matrix& grid, const std::vector<double>& ts,
                            const std::vector<double>& mus, double t, double mu) {
    const double ht = (ts.back() - ts.front()) / static_cast<double>(ts.size() - 1);
    const double hm = (mus.back() - mus.front()) / static_cast<double>(mus.size() - 1);
    if (t < ts.front() || t > ts.back() || mu < mus.front() || mu > mus.back())
        throw invariant_error("bicubic: query outside interpolation hull");
    const double ut = (t - ts.front()) / ht;
    const double um = (mu - mus.front()) / hm;
    auto base = [](double u, std::size_t n) {
        std::ptrdiff_t j = static_cast<std::ptrdiff_t>(std::floor(u));
        if (j > static_cast<std::ptrdiff_t>(n) - 2) j = static_cast<std::ptrdiff_t>(n) - 2;
        if (j < 0) j = 0;
        return j;
    };
    const std::ptrdiff_t it = base(ut, ts.size());
    const std::ptrdiff_t jm = base(um, mus.size());
    auto clampi = [](std::ptrdiff_t v, std::size_t n) {
        if (v < 0) return static_cast<std::size_t>(0);
        if (v >= static_cast<std::ptrdiff_t>(n)) return n - 1;
        return static_cast<std::size_t>(v);
    };
    double acc = 0.0;
    for (std::ptrdiff_t di = -1; di <= 2; ++di) {
        const double wt = keys_kernel(ut - static_cast<double>(it + di));
        if (wt == 0.0) continue;
        const std::size_t row = clampi(it + di, ts.size());
        for (std::ptrdiff_t dj = -1; dj <= 2; ++dj) {
            const double wm = keys_kernel(um - static_cast<double>(jm + dj));
            if (wm == 0.0) continue;
            acc += wt * wm * grid(row, clampi(jm + dj, mus.size()));
        }
    }
    return acc;
}

} // namespace detail

inline void validate_grid(const Matrix& grid, const std::vector<double>& t_axis,
                          const std::vector<double>& mu_axis) {
    detail::check_axis(t_axis, "t_axis");
    detail::check_axis(mu_axis, "mu_axis");
    if (grid.rows() != t_axis.size() || grid.cols() != mu_axis.size())
        throw invariant_error("interpolate: grid shape does not match axes");
}

inline double interpolate_point(const Matrix& grid, const std::vector<double>& t_axis,
                                const std::vector<double>& mu_axis, Method method, double t,
                                double mu) {
    validate_grid(grid, t_axis, mu_axis);
    switch (method) {
        case Method::Bilinear:
            return detail::bilinear_point(grid, t_axis, mu_axis, t, mu);
        case Method::Bicubic:
            detail::require_uniform(t_axis, "t_axis");
            detail::require_uniform(mu_axis, "mu_axis");
            return detail::bicubic_point(grid, t_axis, mu_axis, t, mu);
        case Method::AxisCubic: {
            // mu pass per T row, then one T pass through the row results
            std::vector<double> column(t_axis.size());
            for (std::size_t i = 0; i < t_axis.size(); ++i) {
                std::vector<double> row(grid.row(i), grid.row(i) + grid.cols());
                column[i] = NaturalSpline(mu_axis, row)(mu);
            }
            return NaturalSpline(t_axis, column)(t);
        }
    }
    throw invariant_error("interpolate: unknown method");
}

inline Matrix upscale_grid(const Matrix& grid, const std::vector<double>& t_axis,
                           const std::vector<double>& mu_axis, Method method,
                           const std::vector<double>& target_t,
                           const std::vector<double>& target_mu) {
    validate_grid(grid, t_axis, mu_axis);
    // target axes are arbitrary query lists (repeats allowed), hull-bounded
    auto check_targets = [](const std::vector<double>& q, const std::vector<double>& ax,
                            const char* name) {
        if (q.empty()) throw invariant_error(std::string(name) + ": empty target axis");
        for (double v : q)
            if (!(v >= ax.front() && v <= ax.back()))
                throw invariant_error(std::string(name) + ": query outside interpolation hull");
    };
    check_targets(target_t, t_axis, "target t_axis");
    check_targets(target_mu, mu_axis, "target mu_axis");
    Matrix out(target_t.size(), target_mu.size());

    if (method == Method::AxisCubic) {
        // Separable evaluation; identical numbers to pointwise calls because
        // each spline system is independent of the query location.
        Matrix stage(t_axis.size(), target_mu.size());
        for (std::size_t i = 0; i < t_axis.size(); ++i) {
            std::vector<double> row(grid.row(i), grid.row(i) + grid.cols());
            NaturalSpline s(mu_axis, row);
            for (std::size_t j = 0; j < target_mu.size(); ++j) stage(i, j) = s(target_mu[j]);
        }
        std::vector<double> column(t_axis.size());
        for (std::size_t j = 0; j < target_mu.size(); ++j) {
            for (std::size_t i = 0; i < t_axis.size(); ++i) column[i] = stage(i, j);
            NaturalSpline s(t_axis, column);
            for (std::size_t i = 0; i < target_t.size(); ++i) out(i, j) = s(target_t[i]);
        }
        return out;
    }

    if (method == Method::Bicubic) {
        detail::require_uniform(t_axis, "t_axis");
        detail::require_uniform(mu_axis, "mu_axis");
    }
    for (std::size_t i = 0; i < target_t.size(); ++i)
        for (std::size_t j = 0; j < target_mu.size(); ++j)
            out(i, j) = method == Method::Bilinear
                            ? detail::bilinear_point(grid, t_axis, mu_axis, target_t[i],
                                                     target_mu[j])
                            : detail::bicubic_point(grid, t_axis, mu_axis, target_t[i],
                                                    target_mu[j]);
    return out;
}

} // namespace nniqs::interp

#endif
