// Lattice Schwinger model mapped to a spin chain: physical parameters,
// magnetization-sector bases, per-sector Hamiltonian blocks and the diagonal
// staggered-condensate operator. All energies are stored in units of the
// coupling g.
//
// Conventions fixed here and relied on everywhere else:
//   * site n in {1..N} lives on bit n-1 of a basis mask,
//   * a set bit means Z-eigenvalue +1,
//   * total magnetization (popcount) is conserved, so the Hamiltonian is
//     block-diagonal over Hamming-weight sectors.
#ifndef NNIQS_MODEL_HPP
#define NNIQS_MODEL_HPP

#include <bit>
#include <cstdint>
#include <string>
#include <vector>

#include "nniqs/core.hpp"
#include "nniqs/tensor.hpp"

namespace nniqs::spin {

struct ModelParams {
    int n_sites = 8;
    double w_over_g = 1.0;
    double mu_over_g = 0.0;
    double m_over_g = 0.0; // massless model; kept as a field, always 0 here

    void validate() const {
        if (n_sites < 2 || n_sites > 16)
            throw invariant_error("ModelParams: n_sites must be in [2, 16], got " +
                                  std::to_string(n_sites));
        if (!(w_over_g > 0.0))
            throw invariant_error("ModelParams: w_over_g must be positive");
        if (mu_over_g < 0.0)
            throw invariant_error("ModelParams: mu_over_g must be non-negative");
        if (m_over_g != 0.0)
            throw invariant_error("ModelParams: m_over_g is fixed to 0 in this model");
    }
};

// Basis of one fixed-magnetization sector: all N-bit masks with k set bits,
// ascending.
struct SectorBasis {
    int n_sites = 0;
    int hamming_weight = 0;
    std::vector<std::uint32_t> states;
};

struct HamiltonianBlock {
    SectorBasis sector;
    Matrix matrix; // dense symmetric, dimension C(N, k)
};

// Diagonal of sum_n (-1)^n Z_n over all 2^N masks, plus the conversion factor
// to condensate units of g: (w/g)/N from 1/(2Na) with a = 1/(2w).
struct CondensateDiagonal {
    int n_sites = 0;
    double scale = 0.0;
    std::vector<double> values; // indexed by mask
};

inline double z_of(std::uint32_t mask, int site /* 1-based */) {
    return (mask >> (site - 1)) & 1u ? 1.0 : -1.0;
}

inline std::uint64_t binomial(int n, int k) {
    if (k < 0 || k > n) return 0;
    std::uint64_t r = 1;
    for (int i = 0; i < k; ++i) r = r * (n - i) / (i + 1);
    return r;
}

// All N+1 Hamming-weight sectors, k = 0..N, covering every mask exactly once.
inline std::vector<SectorBasis> enumerate_sectors(const ModelParams& params) {
    params.validate();
    const int n = params.n_sites;
    std::vector<SectorBasis> sectors(n + 1);
    for (int k = 0; k <= n; ++k) {
        sectors[k].n_sites = n;
        sectors[k].hamming_weight = k;
        sectors[k].states.reserve(binomial(n, k));
    }
    const std::uint32_t dim = 1u << n;
    for (std::uint32_t mask = 0; mask < dim; ++mask)
        sectors[std::popcount(mask)].states.push_back(mask);
    return sectors;
}

// Diagonal matrix element of one basis mask, in units of g. Uses prefix sums
// s_n = sum_{l<=n} z_l:   sum_{1<=k<l<=n} z_k z_l = (s_n^2 - n)/2.
inline double diagonal_element(const ModelParams& p, std::uint32_t mask) {
    const int n = p.n_sites;
    const double inv8w = 1.0 / (8.0 * p.w_over_g);
    double prefix = 0.0;
    double zz_sum = 0.0;        // sum_{n=2}^{N-1} sum_{1<=k<l<=n} z_k z_l
    double staggered_sum = 0.0; // sum_{n=1}^{N-1} (n mod 2) * prefix_n
    double field_sum = 0.0;     // sum_n (m/g (-1)^n + mu/g) z_n
    for (int site = 1; site <= n; ++site) {
        const double z = z_of(mask, site);
        prefix += z;
        if (site >= 2 && site <= n - 1) zz_sum += (prefix * prefix - site) * 0.5;
        if (site <= n - 1 && (site % 2) == 1) staggered_sum += prefix;
        const double stagger = (site % 2 == 0) ? 1.0 : -1.0;
        field_sum += (p.m_over_g * stagger + p.mu_over_g) * z;
    }
    return inv8w * zz_sum + 0.5 * field_sum - inv8w * staggered_sum;
}

// Dense symmetric block of the Hamiltonian restricted to one sector.
// Off-diagonals connect masks related by one adjacent 01 <-> 10 swap and
// carry the hopping amplitude w/g.
inline HamiltonianBlock build_block(const ModelParams& params, const SectorBasis& sector) {
    params.validate();
    if (sector.n_sites != params.n_sites)
        throw invariant_error("build_block: sector does not belong to these params");
    const std::size_t dim = sector.states.size();
    HamiltonianBlock block{sector, Matrix(dim, dim)};

    for (std::size_t i = 0; i < dim; ++i)
        block.matrix(i, i) = diagonal_element(params, sector.states[i]);

    const double hop = params.w_over_g;
    for (std::size_t i = 0; i < dim; ++i) {
        const std::uint32_t mask = sector.states[i];
        for (int site = 1; site <= params.n_sites - 1; ++site) {
            const std::uint32_t pair = 0b11u << (site - 1);
            const std::uint32_t bits = mask & pair;
            if (bits == 0 || bits == pair) continue; // 00 or 11: XX+YY annihilates
            const std::uint32_t other = mask ^ pair;
            const auto it = std::lower_bound(sector.states.begin(), sector.states.end(), other);
            const std::size_t j = static_cast<std::size_t>(it - sector.states.begin());
            block.matrix(i, j) = hop;
        }
    }
    return block;
}

inline CondensateDiagonal build_condensate_diagonal(const ModelParams& params) {
    params.validate();
    const int n = params.n_sites;
    CondensateDiagonal d;
    d.n_sites = n;
    d.scale = params.w_over_g / n;
    d.values.resize(std::size_t{1} << n);
    for (std::uint32_t mask = 0; mask < d.values.size(); ++mask) {
        double s = 0.0;
        for (int site = 1; site <= n; ++site)
            s += (site % 2 == 0 ? 1.0 : -1.0) * z_of(mask, site);
        d.values[mask] = s;
    }
    return d;
}

// ---------------------------------------------------------------------------
// Dense test oracle
// ---------------------------------------------------------------------------
// Full 2^N x 2^N Hamiltonian assembled term by term from Kronecker products,
// with no sector bookkeeping. Kept deliberately independent of build_block;
// only used to validate it (and the thermal path) in tests.

namespace detail {

// kron(A, B) with A acting on the higher-significance bits.
inline Matrix kron(const Matrix& a, const Matrix& b) {
    Matrix c(a.rows() * b.rows(), a.cols() * b.cols());
    for (std::size_t ia = 0; ia < a.rows(); ++ia)
        for (std::size_t ja = 0; ja < a.cols(); ++ja) {
            const double v = a(ia, ja);
            if (v == 0.0) continue;
            for (std::size_t ib = 0; ib < b.rows(); ++ib)
                for (std::size_t jb = 0; jb < b.cols(); ++jb)
                    c(ia * b.rows() + ib, ja * b.cols() + jb) = v * b(ib, jb);
        }
    return c;
}

inline Matrix identity(std::size_t dim) {
    Matrix m(dim, dim);
    for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
    return m;
}

// Single-site operator embedded at `site` (1-based, bit site-1).
inline Matrix embed_site(const Matrix& op2, int site, int n) {
    Matrix low = identity(std::size_t{1} << (site - 1));
    Matrix high = identity(std::size_t{1} << (n - site));
    return kron(high, kron(op2, low));
}

// kron(a, b) of diagonal operators represented by their diagonals.
inline std::vector<double> kron_vec(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> c(a.size() * b.size());
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) c[i * b.size() + j] = a[i] * b[j];
    return c;
}

// Diagonal of a single-site Z embedded at `site`.
inline std::vector<double> embed_site_z_diag(int site, int n) {
    const std::vector<double> z2{-1.0, 1.0}; // bit set <=> Z = +1
    std::vector<double> low(std::size_t{1} << (site - 1), 1.0);
    std::vector<double> high(std::size_t{1} << (n - site), 1.0);
    return kron_vec(high, kron_vec(z2, low));
}

// Two-site bond operator on (site, site+1) embedded in the full space.
inline Matrix embed_bond(const Matrix& op4, int site, int n) {
    Matrix low = identity(std::size_t{1} << (site - 1));
    Matrix high = identity(std::size_t{1} << (n - site - 1));
    return kron(high, kron(op4, low));
}

} // namespace detail

inline Matrix dense_oracle(const ModelParams& params) {
    params.validate();
    const int n = params.n_sites;
    if (n > 10) throw invariant_error("dense_oracle: N > 10 is not supported (oracle only)");
    const std::size_t dim = std::size_t{1} << n;

    // bit set <=> Z = +1, index order (bit clear, bit set)
    Matrix z2(2, 2);
    z2(0, 0) = -1.0;
    z2(1, 1) = 1.0;
    Matrix x2(2, 2);
    x2(0, 1) = x2(1, 0) = 1.0;
    // Y x Y is real; entries (i1 i0),(j1 j0) = Y[i1][j1] Y[i0][j0] with
    // Y = [[0, -i], [i, 0]] in the same index order.
    Matrix yy4(4, 4);
    yy4(0, 3) = yy4(3, 0) = -1.0;
    yy4(1, 2) = yy4(2, 1) = 1.0;

    Matrix h(dim, dim);
    auto add = [&](const Matrix& term, double coeff) {
        for (std::size_t i = 0; i < dim * dim; ++i) h.data()[i] += coeff * term.data()[i];
    };
    auto add_diag = [&](const std::vector<double>& diag, double coeff) {
        for (std::size_t i = 0; i < dim; ++i) h(i, i) += coeff * diag[i];
    };

    const double inv8w = 1.0 / (8.0 * params.w_over_g);

    // long-range ZZ ladder; the product of two embedded Z diagonals is their
    // elementwise product
    for (int nn = 2; nn <= n - 1; ++nn)
        for (int k = 1; k < nn; ++k)
            for (int l = k + 1; l <= nn; ++l) {
                const auto zk = detail::embed_site_z_diag(k, n);
                const auto zl = detail::embed_site_z_diag(l, n);
                std::vector<double> zz(dim);
                for (std::size_t i = 0; i < dim; ++i) zz[i] = zk[i] * zl[i];
                add_diag(zz, inv8w);
            }

    // nearest-neighbour XX + YY
    for (int site = 1; site <= n - 1; ++site) {
        Matrix xx = blas::matmul(detail::embed_site(x2, site, n),
                                 detail::embed_site(x2, site + 1, n));
        add(xx, 0.5 * params.w_over_g);
        add(detail::embed_bond(yy4, site, n), 0.5 * params.w_over_g);
    }

    // staggered mass + chemical potential
    for (int site = 1; site <= n; ++site) {
        const double stagger = (site % 2 == 0) ? 1.0 : -1.0;
        add_diag(detail::embed_site_z_diag(site, n),
                 0.5 * (params.m_over_g * stagger + params.mu_over_g));
    }

    // electric-field correction ladder
    for (int nn = 1; nn <= n - 1; ++nn) {
        if (nn % 2 == 0) continue;
        for (int l = 1; l <= nn; ++l)
            add_diag(detail::embed_site_z_diag(l, n), -inv8w);
    }

    return h;
}

} // namespace nniqs::spin

#endif
