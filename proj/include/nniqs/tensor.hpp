// Dense row-major matrix container plus the handful of BLAS-like kernels the
// training path is built on. Weight matrices are stored (in x out) so that
// forward, input-gradient and weight-gradient products all stream contiguous
// rows through the vectorized inner loops.
#ifndef NNIQS_TENSOR_HPP
#define NNIQS_TENSOR_HPP

#include <algorithm>
#include <cstddef>
#include <cstring>
#include <vector>

#include "nniqs/core.hpp"

namespace nniqs {

class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    auto begin() { return data_.begin(); }
    auto end() { return data_.end(); }
    auto begin() const { return data_.begin(); }
    auto end() const { return data_.end(); }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    void zero() { std::fill(data_.begin(), data_.end(), 0.0); }
    void resize(std::size_t rows, std::size_t cols, double fill = 0.0) {
        rows_ = rows;
        cols_ = cols;
        data_.assign(rows * cols, fill);
    }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// All three product kernels share one packed-panel scheme: 16 logical columns
// of the right operand are interleaved into a k x 16 panel (tail lanes zero
// padded), then 4 x 16 register tiles sweep k with eight independent
// accumulator chains. Every C element is produced by a single ascending k
// sum followed by one store or add, so results are identical run to run and
// independent of tile traversal order.
namespace blas {

namespace detail {

constexpr std::size_t kMR = 4;  // C rows per register tile
constexpr std::size_t kNR = 16; // C cols per register tile

// panel[p * kNR + u] = B[p][j + u] for row-major B (k x n); tail lanes zeroed.
inline void pack_rows(const double* b, std::size_t k, std::size_t n,
                      std::size_t j, std::size_t jw, double* panel) {
    for (std::size_t p = 0; p < k; ++p) {
        const double* bp = b + p * n + j;
        double* row = panel + p * kNR;
        std::size_t u = 0;
        for (; u < jw; ++u) row[u] = bp[u];
        for (; u < kNR; ++u) row[u] = 0.0;
    }
}

// panel[p * kNR + u] = B[j + u][p] for row-major B (n x k); lanes are B rows.
inline void pack_cols(const double* b, std::size_t k,
                      std::size_t j, std::size_t jw, double* panel) {
    for (std::size_t u = 0; u < jw; ++u) {
        const double* bu = b + (j + u) * k;
        double* lane = panel + u;
        for (std::size_t p = 0; p < k; ++p, lane += kNR) *lane = bu[p];
    }
    for (std::size_t u = jw; u < kNR; ++u) {
        double* lane = panel + u;
        for (std::size_t p = 0; p < k; ++p, lane += kNR) *lane = 0.0;
    }
}

#if defined(__GNUC__) || defined(__clang__)

typedef double v8df __attribute__((vector_size(64), aligned(8), may_alias));

// t = (4 x 16) tile of A-rows times panel. a0..a3 are separate k-long rows.
inline void tile4(const double* a0, const double* a1, const double* a2,
                  const double* a3, const double* panel, std::size_t k,
                  double t[kMR][kNR]) {
    v8df s0a{}, s0b{}, s1a{}, s1b{}, s2a{}, s2b{}, s3a{}, s3b{};
    for (std::size_t p = 0; p < k; ++p, panel += kNR) {
        const v8df ba = *(const v8df*)panel;
        const v8df bb = *(const v8df*)(panel + 8);
        const double x0 = a0[p], x1 = a1[p], x2 = a2[p], x3 = a3[p];
        s0a += ba * x0;
        s0b += bb * x0;
        s1a += ba * x1;
        s1b += bb * x1;
        s2a += ba * x2;
        s2b += bb * x2;
        s3a += ba * x3;
        s3b += bb * x3;
    }
    std::memcpy(&t[0][0], &s0a, 64);
    std::memcpy(&t[0][8], &s0b, 64);
    std::memcpy(&t[1][0], &s1a, 64);
    std::memcpy(&t[1][8], &s1b, 64);
    std::memcpy(&t[2][0], &s2a, 64);
    std::memcpy(&t[2][8], &s2b, 64);
    std::memcpy(&t[3][0], &s3a, 64);
    std::memcpy(&t[3][8], &s3b, 64);
}

// Same tile with the four A lanes contiguous inside strided rows (A^T view).
inline void tile4s(const double* a, std::size_t stride, const double* panel,
                   std::size_t k, double t[kMR][kNR]) {
    v8df s0a{}, s0b{}, s1a{}, s1b{}, s2a{}, s2b{}, s3a{}, s3b{};
    for (std::size_t p = 0; p < k; ++p, a += stride, panel += kNR) {
        const v8df ba = *(const v8df*)panel;
        const v8df bb = *(const v8df*)(panel + 8);
        const double x0 = a[0], x1 = a[1], x2 = a[2], x3 = a[3];
        s0a += ba * x0;
        s0b += bb * x0;
        s1a += ba * x1;
        s1b += bb * x1;
        s2a += ba * x2;
        s2b += bb * x2;
        s3a += ba * x3;
        s3b += bb * x3;
    }
    std::memcpy(&t[0][0], &s0a, 64);
    std::memcpy(&t[0][8], &s0b, 64);
    std::memcpy(&t[1][0], &s1a, 64);
    std::memcpy(&t[1][8], &s1b, 64);
    std::memcpy(&t[2][0], &s2a, 64);
    std::memcpy(&t[2][8], &s2b, 64);
    std::memcpy(&t[3][0], &s3a, 64);
    std::memcpy(&t[3][8], &s3b, 64);
}

inline void tile1(const double* a0, std::size_t stride, const double* panel,
                  std::size_t k, double t[kNR]) {
    v8df sa{}, sb{};
    for (std::size_t p = 0; p < k; ++p, a0 += stride, panel += kNR) {
        const v8df ba = *(const v8df*)panel;
        const v8df bb = *(const v8df*)(panel + 8);
        const double x = *a0;
        sa += ba * x;
        sb += bb * x;
    }
    std::memcpy(&t[0], &sa, 64);
    std::memcpy(&t[8], &sb, 64);
}

#else

inline void tile4(const double* a0, const double* a1, const double* a2,
                  const double* a3, const double* panel, std::size_t k,
                  double t[kMR][kNR]) {
    for (std::size_t r = 0; r < kMR; ++r)
        for (std::size_t u = 0; u < kNR; ++u) t[r][u] = 0.0;
    for (std::size_t p = 0; p < k; ++p, panel += kNR) {
        const double x0 = a0[p], x1 = a1[p], x2 = a2[p], x3 = a3[p];
        for (std::size_t u = 0; u < kNR; ++u) t[0][u] += x0 * panel[u];
        for (std::size_t u = 0; u < kNR; ++u) t[1][u] += x1 * panel[u];
        for (std::size_t u = 0; u < kNR; ++u) t[2][u] += x2 * panel[u];
        for (std::size_t u = 0; u < kNR; ++u) t[3][u] += x3 * panel[u];
    }
}

inline void tile4s(const double* a, std::size_t stride, const double* panel,
                   std::size_t k, double t[kMR][kNR]) {
    for (std::size_t r = 0; r < kMR; ++r)
        for (std::size_t u = 0; u < kNR; ++u) t[r][u] = 0.0;
    for (std::size_t p = 0; p < k; ++p, a += stride, panel += kNR) {
        const double x0 = a[0], x1 = a[1], x2 = a[2], x3 = a[3];
        for (std::size_t u = 0; u < kNR; ++u) t[0][u] += x0 * panel[u];
        for (std::size_t u = 0; u < kNR; ++u) t[1][u] += x1 * panel[u];
        for (std::size_t u = 0; u < kNR; ++u) t[2][u] += x2 * panel[u];
        for (std::size_t u = 0; u < kNR; ++u) t[3][u] += x3 * panel[u];
    }
}

inline void tile1(const double* a0, std::size_t stride, const double* panel,
                  std::size_t k, double t[kNR]) {
    for (std::size_t u = 0; u < kNR; ++u) t[u] = 0.0;
    for (std::size_t p = 0; p < k; ++p, a0 += stride, panel += kNR) {
        const double x = *a0;
        for (std::size_t u = 0; u < kNR; ++u) t[u] += x * panel[u];
    }
}

#endif

} // namespace detail

// C (m x n) += A (m x k) * B (k x n), all row-major.
inline void gemm_acc(const double* a, const double* b, double* c,
                     std::size_t m, std::size_t k, std::size_t n) {
    using detail::kMR;
    using detail::kNR;
    std::vector<double> panel(k * kNR);
    double t[kMR][kNR];
    const std::size_t mb = m / kMR, jb = (n + kNR - 1) / kNR;
    for (std::size_t jt = 0; jt < jb; ++jt) {
        const std::size_t j = jt * kNR;
        const std::size_t jw = std::min(kNR, n - j);
        detail::pack_rows(b, k, n, j, jw, panel.data());
        for (std::size_t it = 0; it < mb; ++it) {
            const std::size_t i = it * kMR;
            detail::tile4(a + (i + 0) * k, a + (i + 1) * k, a + (i + 2) * k,
                          a + (i + 3) * k, panel.data(), k, t);
            for (std::size_t r = 0; r < kMR; ++r) {
                double* cr = c + (i + r) * n + j;
                for (std::size_t u = 0; u < jw; ++u) cr[u] += t[r][u];
            }
        }
        for (std::size_t i = mb * kMR; i < m; ++i) {
            detail::tile1(a + i * k, 1, panel.data(), k, t[0]);
            double* cr = c + i * n + j;
            for (std::size_t u = 0; u < jw; ++u) cr[u] += t[0][u];
        }
    }
}

inline void gemm(const double* a, const double* b, double* c,
                 std::size_t m, std::size_t k, std::size_t n) {
    std::memset(c, 0, m * n * sizeof(double));
    gemm_acc(a, b, c, m, k, n);
}

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw invariant_error("matmul: inner dimensions differ");
    Matrix c(a.rows(), b.cols());
    gemm(a.data(), b.data(), c.data(), a.rows(), a.cols(), b.cols());
    return c;
}

// C (m x n) += A^T (m x k stored k x m) * B (k x n). Used for weight
// gradients dW = X^T dY without materializing the transpose.
inline void gemm_at_acc(const double* a, const double* b, double* c,
                        std::size_t m, std::size_t k, std::size_t n) {
    using detail::kMR;
    using detail::kNR;
    std::vector<double> panel(k * kNR);
    double t[kMR][kNR];
    const std::size_t mb = m / kMR, jb = (n + kNR - 1) / kNR;
    for (std::size_t jt = 0; jt < jb; ++jt) {
        const std::size_t j = jt * kNR;
        const std::size_t jw = std::min(kNR, n - j);
        detail::pack_rows(b, k, n, j, jw, panel.data());
        for (std::size_t it = 0; it < mb; ++it) {
            const std::size_t i = it * kMR;
            detail::tile4s(a + i, m, panel.data(), k, t);
            for (std::size_t r = 0; r < kMR; ++r) {
                double* cr = c + (i + r) * n + j;
                for (std::size_t u = 0; u < jw; ++u) cr[u] += t[r][u];
            }
        }
        for (std::size_t i = mb * kMR; i < m; ++i) {
            detail::tile1(a + i, m, panel.data(), k, t[0]);
            double* cr = c + i * n + j;
            for (std::size_t u = 0; u < jw; ++u) cr[u] += t[0][u];
        }
    }
}

namespace detail {

// Shared core for C = / += A (m x k) * B^T with B stored n x k.
template <bool Accumulate>
inline void gemm_bt_core(const double* a, const double* b, double* c,
                         std::size_t m, std::size_t k, std::size_t n) {
    std::vector<double> panel(k * kNR);
    double t[kMR][kNR];
    const std::size_t mb = m / kMR, jb = (n + kNR - 1) / kNR;
    for (std::size_t jt = 0; jt < jb; ++jt) {
        const std::size_t j = jt * kNR;
        const std::size_t jw = std::min(kNR, n - j);
        pack_cols(b, k, j, jw, panel.data());
        for (std::size_t it = 0; it < mb; ++it) {
            const std::size_t i = it * kMR;
            tile4(a + (i + 0) * k, a + (i + 1) * k, a + (i + 2) * k,
                  a + (i + 3) * k, panel.data(), k, t);
            for (std::size_t r = 0; r < kMR; ++r) {
                double* cr = c + (i + r) * n + j;
                for (std::size_t u = 0; u < jw; ++u) {
                    if constexpr (Accumulate)
                        cr[u] += t[r][u];
                    else
                        cr[u] = t[r][u];
                }
            }
        }
        for (std::size_t i = mb * kMR; i < m; ++i) {
            tile1(a + i * k, 1, panel.data(), k, t[0]);
            double* cr = c + i * n + j;
            for (std::size_t u = 0; u < jw; ++u) {
                if constexpr (Accumulate)
                    cr[u] += t[0][u];
                else
                    cr[u] = t[0][u];
            }
        }
    }
}

} // namespace detail

// C (m x n) = A (m x k) * B^T (n x k stored row-major).
inline void gemm_bt(const double* a, const double* b, double* c,
                    std::size_t m, std::size_t k, std::size_t n) {
    detail::gemm_bt_core<false>(a, b, c, m, k, n);
}

inline void gemm_bt_acc(const double* a, const double* b, double* c,
                        std::size_t m, std::size_t k, std::size_t n) {
    detail::gemm_bt_core<true>(a, b, c, m, k, n);
}

} // namespace blas
} // namespace nniqs

#endif
