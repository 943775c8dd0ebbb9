// Dense symmetric eigensolver: Householder reduction to tridiagonal form
// followed by implicit-shift QL iteration with eigenvector accumulation.
// Eigenvalues are returned ascending, eigenvectors as orthonormal columns.
#ifndef NNIQS_EIGEN_HPP
#define NNIQS_EIGEN_HPP

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "nniqs/core.hpp"
#include "nniqs/tensor.hpp"

namespace nniqs::eig {

struct EigenDecomposition {
    std::vector<double> eigenvalues; // ascending
    Matrix eigenvectors;             // column k pairs with eigenvalues[k]
};

namespace detail {

inline double hypot2(double a, double b) { return std::hypot(a, b); }

// Householder reduction of symmetric a (destroyed) to tridiagonal (d, e),
// accumulating the orthogonal transform in a itself.
inline void tridiagonalize(Matrix& a, std::vector<double>& d, std::vector<double>& e) {
    const std::size_t n = a.rows();
    d.assign(n, 0.0);
    e.assign(n, 0.0);
    for (std::size_t i = n - 1; i > 0; --i) {
        const std::size_t l = i - 1;
        double h = 0.0;
        double scale = 0.0;
        if (l > 0) {
            for (std::size_t k = 0; k <= l; ++k) scale += std::fabs(a(i, k));
            if (scale == 0.0) {
                e[i] = a(i, l);
            } else {
                for (std::size_t k = 0; k <= l; ++k) {
                    a(i, k) /= scale;
                    h += a(i, k) * a(i, k);
                }
                double f = a(i, l);
                double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                a(i, l) = f - g;
                f = 0.0;
                for (std::size_t j = 0; j <= l; ++j) {
                    a(j, i) = a(i, j) / h;
                    g = 0.0;
                    for (std::size_t k = 0; k <= j; ++k) g += a(j, k) * a(i, k);
                    for (std::size_t k = j + 1; k <= l; ++k) g += a(k, j) * a(i, k);
                    e[j] = g / h;
                    f += e[j] * a(i, j);
                }
                const double hh = f / (h + h);
                for (std::size_t j = 0; j <= l; ++j) {
                    f = a(i, j);
                    e[j] = g = e[j] - hh * f;
                    for (std::size_t k = 0; k <= j; ++k)
                        a(j, k) -= f * e[k] + g * a(i, k);
                }
            }
        } else {
            e[i] = a(i, l);
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        if (d[i] != 0.0) {
            for (std::size_t j = 0; j < i; ++j) {
                double g = 0.0;
                for (std::size_t k = 0; k < i; ++k) g += a(i, k) * a(k, j);
                for (std::size_t k = 0; k < i; ++k) a(k, j) -= g * a(k, i);
            }
        }
        d[i] = a(i, i);
        a(i, i) = 1.0;
        for (std::size_t j = 0; j < i; ++j) a(j, i) = a(i, j) = 0.0;
    }
}

// Implicit-shift QL on the tridiagonal (d, e); z accumulates eigenvectors.
// Off-diagonals are treated as converged below kRelTol relative to the local
// diagonal scale; kMaxSweeps caps the iterations per eigenvalue.
inline void ql_implicit(std::vector<double>& d, std::vector<double>& e, Matrix& z) {
    constexpr double kRelTol = 1e-12;
    constexpr int kMaxSweeps = 60;
    const std::size_t n = d.size();
    if (n == 0) return;
    for (std::size_t i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        int iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= kRelTol * dd || e[m] == 0.0) break;
            }
            if (m != l) {
                if (iter++ == kMaxSweeps)
                    throw numeric_error("ql_implicit: no convergence after " +
                                        std::to_string(kMaxSweeps) + " sweeps (row " +
                                        std::to_string(l) + ")");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = hypot2(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::fabs(r) : -std::fabs(r)));
                double s = 1.0;
                double c = 1.0;
                double p = 0.0;
                for (std::size_t i = m; i-- > l;) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = hypot2(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (std::size_t k = 0; k < n; ++k) {
                        f = z(k, i + 1);
                        z(k, i + 1) = s * z(k, i) + c * f;
                        z(k, i) = c * z(k, i) - s * f;
                    }
                }
                if (r == 0.0 && m - l > 1) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

} // namespace detail

// Full eigendecomposition of a dense symmetric matrix.
inline EigenDecomposition symmetric_eigensolve(const Matrix& input) {
    if (input.rows() != input.cols())
        throw invariant_error("symmetric_eigensolve: matrix must be square");
    const std::size_t n = input.rows();
    EigenDecomposition out;
    if (n == 0) return out;
    if (n == 1) {
        out.eigenvalues = {input(0, 0)};
        out.eigenvectors = Matrix(1, 1, 1.0);
        return out;
    }

    Matrix z = input;
    std::vector<double> d, e;
    detail::tridiagonalize(z, d, e);
    detail::ql_implicit(d, e, z);

    // sort ascending, permuting eigenvector columns along
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = d[order[k]];
        for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, k) = z(r, order[k]);
    }
    return out;
}

} // namespace nniqs::eig

#endif
