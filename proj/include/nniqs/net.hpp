// Local implicit field over phase diagrams: a residual convolutional encoder
// lifts the packed 3-channel input to a latent grid; a coordinate-conditioned
// MLP decoder is queried at continuous points through a four-corner local
// ensemble whose weights are the bilinear coefficients of the latent cell.
// Forward and reverse passes are hand-written GEMM compositions; gradients
// are certified against finite differences by the test suite.
#ifndef NNIQS_NET_HPP
#define NNIQS_NET_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "nniqs/core.hpp"
#include "nniqs/dataset.hpp"
#include "nniqs/tensor.hpp"

namespace nniqs::net {

// --- configuration and parameters ---------------------------------------

struct NetworkConfig {
    std::size_t in_channels = 3;
    std::size_t latent_channels = 64;
    std::size_t n_res_blocks = 8;
    std::size_t hidden_width = 256;
    std::size_t n_hidden_layers = 5;

    // latent vector + 2 coordinate offsets + 2 cell components
    std::size_t decoder_input() const { return latent_channels + 4; }

    void validate() const {
        if (in_channels == 0 || latent_channels == 0 || hidden_width == 0 ||
            n_hidden_layers == 0)
            throw invariant_error("NetworkConfig: zero-sized dimension");
    }

    static NetworkConfig standard() { return NetworkConfig{}; }
    // miniature config used by the finite-difference certification
    static NetworkConfig mini() { return NetworkConfig{3, 4, 1, 8, 2}; }

    bool operator==(const NetworkConfig&) const = default;
};

struct ConvParam {
    Matrix w; // C_out x (C_in * 9)
    std::vector<double> b;
};

struct DenseParam {
    Matrix w; // in x out
    std::vector<double> b;
};

struct ParamSet {
    ConvParam head;
    std::vector<ConvParam> blocks; // conv1, conv2 per residual block
    std::vector<DenseParam> dense; // n_hidden_layers + output layer
};

inline ParamSet make_params(const NetworkConfig& c) {
    c.validate();
    ParamSet p;
    const std::size_t d = c.latent_channels;
    p.head.w = Matrix(d, c.in_channels * 9);
    p.head.b.assign(d, 0.0);
    p.blocks.resize(2 * c.n_res_blocks);
    for (auto& cp : p.blocks) {
        cp.w = Matrix(d, d * 9);
        cp.b.assign(d, 0.0);
    }
    p.dense.resize(c.n_hidden_layers + 1);
    std::size_t in = c.decoder_input();
    for (std::size_t l = 0; l < c.n_hidden_layers; ++l) {
        p.dense[l].w = Matrix(in, c.hidden_width);
        p.dense[l].b.assign(c.hidden_width, 0.0);
        in = c.hidden_width;
    }
    p.dense.back().w = Matrix(in, 1);
    p.dense.back().b.assign(1, 0.0);
    return p;
}

// Tensors in declared order; the same order fixes checkpoint layout and
// optimizer state alignment.
template <typename F>
void visit_params(ParamSet& p, F&& f) {
    f(p.head.w.data(), p.head.w.size());
    f(p.head.b.data(), p.head.b.size());
    for (auto& cp : p.blocks) {
        f(cp.w.data(), cp.w.size());
        f(cp.b.data(), cp.b.size());
    }
    for (auto& dp : p.dense) {
        f(dp.w.data(), dp.w.size());
        f(dp.b.data(), dp.b.size());
    }
}

template <typename F>
void visit_params(const ParamSet& p, F&& f) {
    f(p.head.w.data(), p.head.w.size());
    f(p.head.b.data(), p.head.b.size());
    for (const auto& cp : p.blocks) {
        f(cp.w.data(), cp.w.size());
        f(cp.b.data(), cp.b.size());
    }
    for (const auto& dp : p.dense) {
        f(dp.w.data(), dp.w.size());
        f(dp.b.data(), dp.b.size());
    }
}

// Synchronized walk over two structurally identical sets (parameters and
// their gradients or moments).
template <typename F>
void visit_params2(ParamSet& a, const ParamSet& b, F&& f) {
    f(a.head.w.data(), b.head.w.data(), a.head.w.size());
    f(a.head.b.data(), b.head.b.data(), a.head.b.size());
    for (std::size_t i = 0; i < a.blocks.size(); ++i) {
        f(a.blocks[i].w.data(), b.blocks[i].w.data(), a.blocks[i].w.size());
        f(a.blocks[i].b.data(), b.blocks[i].b.data(), a.blocks[i].b.size());
    }
    for (std::size_t i = 0; i < a.dense.size(); ++i) {
        f(a.dense[i].w.data(), b.dense[i].w.data(), a.dense[i].w.size());
        f(a.dense[i].b.data(), b.dense[i].b.data(), a.dense[i].b.size());
    }
}

inline std::size_t param_count(const ParamSet& p) {
    std::size_t n = 0;
    visit_params(p, [&](const double*, std::size_t len) { n += len; });
    return n;
}

inline void zero_params(ParamSet& p) {
    visit_params(p, [](double* ptr, std::size_t len) { std::fill(ptr, ptr + len, 0.0); });
}

inline void axpy_params(ParamSet& dst, const ParamSet& src, double alpha = 1.0) {
    visit_params2(dst, src, [alpha](double* d, const double* s, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) d[i] += alpha * s[i];
    });
}

inline bool params_finite(const ParamSet& p) {
    bool ok = true;
    visit_params(p, [&](const double* ptr, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i)
            if (!std::isfinite(ptr[i])) ok = false;
    });
    return ok;
}

// Weights uniform in +-1/sqrt(fan_in), biases zero; one seeded stream, draw
// order fixed by the declared tensor order.
inline void init_params(ParamSet& p, const NetworkConfig& c, std::uint64_t seed) {
    rng::Stream stream(seed);
    auto fill = [&](Matrix& w, std::size_t fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (auto& v : w) v = stream.uniform_real(-bound, bound);
    };
    fill(p.head.w, c.in_channels * 9);
    for (auto& cp : p.blocks) fill(cp.w, c.latent_channels * 9);
    std::size_t in = c.decoder_input();
    for (std::size_t l = 0; l < p.dense.size(); ++l) {
        fill(p.dense[l].w, in);
        in = c.hidden_width;
    }
}

struct NetworkState {
    NetworkConfig config;
    ParamSet params;
    std::uint64_t step = 0;
};

inline NetworkState make_network(const NetworkConfig& c, std::uint64_t seed) {
    NetworkState s;
    s.config = c;
    s.params = make_params(c);
    init_params(s.params, c, seed);
    return s;
}

// --- convolution plumbing ------------------------------------------------

namespace detail {

// 3x3, stride 1, zero padding 1. Column matrix layout: row = (c*3+ki)*3+kj,
// column = pixel index; the conv is then one GEMM per layer.
inline void im2col(const double* x, std::size_t c_in, std::size_t h, std::size_t w,
                   double* col) {
    const std::size_t hw = h * w;
    for (std::size_t c = 0; c < c_in; ++c) {
        const double* src = x + c * hw;
        for (std::size_t ki = 0; ki < 3; ++ki) {
            for (std::size_t kj = 0; kj < 3; ++kj) {
                double* dst = col + ((c * 3 + ki) * 3 + kj) * hw;
                for (std::size_t i = 0; i < h; ++i) {
                    const std::ptrdiff_t si = static_cast<std::ptrdiff_t>(i + ki) - 1;
                    double* drow = dst + i * w;
                    if (si < 0 || si >= static_cast<std::ptrdiff_t>(h)) {
                        std::fill(drow, drow + w, 0.0);
                        continue;
                    }
                    const double* srow = src + static_cast<std::size_t>(si) * w;
                    if (kj == 0) {
                        drow[0] = 0.0;
                        std::copy(srow, srow + (w - 1), drow + 1);
                    } else if (kj == 1) {
                        std::copy(srow, srow + w, drow);
                    } else {
                        std::copy(srow + 1, srow + w, drow);
                        drow[w - 1] = 0.0;
                    }
                }
            }
        }
    }
}

// Transpose of im2col: scatter-add column-matrix gradients back to the map.
inline void col2im_acc(const double* col, std::size_t c_in, std::size_t h, std::size_t w,
                       double* dx) {
    const std::size_t hw = h * w;
    for (std::size_t c = 0; c < c_in; ++c) {
        double* dst = dx + c * hw;
        for (std::size_t ki = 0; ki < 3; ++ki) {
            for (std::size_t kj = 0; kj < 3; ++kj) {
                const double* src = col + ((c * 3 + ki) * 3 + kj) * hw;
                for (std::size_t i = 0; i < h; ++i) {
                    const std::ptrdiff_t si = static_cast<std::ptrdiff_t>(i + ki) - 1;
                    if (si < 0 || si >= static_cast<std::ptrdiff_t>(h)) continue;
                    double* drow = dst + static_cast<std::size_t>(si) * w;
                    const double* srow = src + i * w;
                    if (kj == 0) {
                        for (std::size_t j = 1; j < w; ++j) drow[j - 1] += srow[j];
                    } else if (kj == 1) {
                        for (std::size_t j = 0; j < w; ++j) drow[j] += srow[j];
                    } else {
                        for (std::size_t j = 0; j + 1 < w; ++j) drow[j + 1] += srow[j];
                    }
                }
            }
        }
    }
}

inline void conv_forward(const ConvParam& p, const double* x, std::size_t c_in, std::size_t h,
                         std::size_t w, double* out, std::vector<double>& colbuf) {
    const std::size_t hw = h * w;
    const std::size_t kk = c_in * 9;
    colbuf.resize(kk * hw);
    im2col(x, c_in, h, w, colbuf.data());
    blas::gemm(p.w.data(), colbuf.data(), out, p.w.rows(), kk, hw);
    for (std::size_t c = 0; c < p.w.rows(); ++c) {
        double* row = out + c * hw;
        const double bias = p.b[c];
        for (std::size_t i = 0; i < hw; ++i) row[i] += bias;
    }
}

// Accumulates dW/db into `grad` and, when dx is non-null, scatter-adds the
// input gradient (dx must be pre-initialized by the caller).
inline void conv_backward(const ConvParam& p, const double* x, const double* dy,
                          std::size_t c_in, std::size_t h, std::size_t w, double* dx,
                          ConvParam& grad, std::vector<double>& colbuf,
                          std::vector<double>& dcolbuf) {
    const std::size_t hw = h * w;
    const std::size_t kk = c_in * 9;
    const std::size_t c_out = p.w.rows();
    colbuf.resize(kk * hw);
    im2col(x, c_in, h, w, colbuf.data());
    blas::gemm_bt_acc(dy, colbuf.data(), grad.w.data(), c_out, hw, kk);
    for (std::size_t c = 0; c < c_out; ++c) {
        const double* row = dy + c * hw;
        double acc = 0.0;
        for (std::size_t i = 0; i < hw; ++i) acc += row[i];
        grad.b[c] += acc;
    }
    if (dx) {
        dcolbuf.assign(kk * hw, 0.0);
        blas::gemm_at_acc(p.w.data(), dy, dcolbuf.data(), kk, c_out, hw);
        col2im_acc(dcolbuf.data(), c_in, h, w, dx);
    }
}

} // namespace detail

// --- encoder -------------------------------------------------------------

struct LatentGrid {
    std::size_t d = 0;
    std::size_t h = 0;
    std::size_t w = 0;
    std::vector<double> data; // d x h x w, channel-major
    std::vector<double> t_coords;
    std::vector<double> mu_coords;

    const double* channel(std::size_t c) const { return data.data() + c * h * w; }
};

// Activations needed by the reverse pass: the running map after the head and
// after every block, plus each block's first-conv pre-activation and its
// rectified copy.
struct EncoderTape {
    std::vector<std::vector<double>> acts;
    std::vector<std::vector<double>> a1;
    std::vector<std::vector<double>> h1;
};

inline LatentGrid encode(const NetworkState& s, const data::Grid3& in,
                         EncoderTape* tape = nullptr) {
    const NetworkConfig& c = s.config;
    if (in.h == 0 || in.w == 0 || in.data.size() != c.in_channels * in.h * in.w)
        throw invariant_error("encode: input shape does not match config");
    const std::size_t hw = in.h * in.w;
    const std::size_t d = c.latent_channels;
    std::vector<double> colbuf;

    std::vector<double> cur(d * hw);
    detail::conv_forward(s.params.head, in.data.data(), c.in_channels, in.h, in.w, cur.data(),
                         colbuf);
    if (tape) {
        tape->acts.assign(1, cur);
        tape->a1.clear();
        tape->h1.clear();
    }

    std::vector<double> a1(d * hw), h1(d * hw), a2(d * hw);
    for (std::size_t b = 0; b < c.n_res_blocks; ++b) {
        const ConvParam& c1 = s.params.blocks[2 * b];
        const ConvParam& c2 = s.params.blocks[2 * b + 1];
        detail::conv_forward(c1, cur.data(), d, in.h, in.w, a1.data(), colbuf);
        for (std::size_t i = 0; i < a1.size(); ++i) h1[i] = a1[i] > 0.0 ? a1[i] : 0.0;
        detail::conv_forward(c2, h1.data(), d, in.h, in.w, a2.data(), colbuf);
        for (std::size_t i = 0; i < cur.size(); ++i) cur[i] += a2[i];
        if (tape) {
            tape->a1.push_back(a1);
            tape->h1.push_back(h1);
            tape->acts.push_back(cur);
        }
    }

    LatentGrid g;
    g.d = d;
    g.h = in.h;
    g.w = in.w;
    g.data = std::move(cur);
    g.t_coords = data::chart(in.h);
    g.mu_coords = data::chart(in.w);
    return g;
}

// dlatent is consumed as the running upstream gradient; conv gradients
// accumulate into `grads`.
inline void encode_backward(const NetworkState& s, const data::Grid3& in,
                            const EncoderTape& tape, std::vector<double>& dlatent,
                            ParamSet& grads) {
    const NetworkConfig& c = s.config;
    const std::size_t hw = in.h * in.w;
    const std::size_t d = c.latent_channels;
    std::vector<double> colbuf, dcolbuf;
    std::vector<double> dh(d * hw), dx(d * hw);

    for (std::size_t b = c.n_res_blocks; b-- > 0;) {
        const ConvParam& c1 = s.params.blocks[2 * b];
        const ConvParam& c2 = s.params.blocks[2 * b + 1];
        // y = x + C2(relu(C1 x)); dlatent currently holds dy
        std::fill(dh.begin(), dh.end(), 0.0);
        detail::conv_backward(c2, tape.h1[b].data(), dlatent.data(), d, in.h, in.w, dh.data(),
                              grads.blocks[2 * b + 1], colbuf, dcolbuf);
        const auto& a1 = tape.a1[b];
        for (std::size_t i = 0; i < dh.size(); ++i)
            if (a1[i] <= 0.0) dh[i] = 0.0;
        dx = dlatent; // skip connection
        detail::conv_backward(c1, tape.acts[b].data(), dh.data(), d, in.h, in.w, dx.data(),
                              grads.blocks[2 * b], colbuf, dcolbuf);
        dlatent = dx;
    }
    detail::conv_backward(s.params.head, in.data.data(), dlatent.data(), c.in_channels, in.h,
                          in.w, nullptr, grads.head, colbuf, dcolbuf);
}

// --- decoder -------------------------------------------------------------

struct DecoderTape {
    Matrix x;                // batch input
    std::vector<Matrix> pre; // pre-activation per hidden layer
    std::vector<double> out; // sigmoid outputs
};

// Hidden layers with rectified-linear activations; sigmoid output keeps
// predictions inside model space.
inline void decoder_forward(const ParamSet& p, const NetworkConfig& c, const Matrix& x,
                            std::vector<double>& out, DecoderTape* tape) {
    if (x.cols() != c.decoder_input())
        throw invariant_error("decoder_forward: input width mismatch");
    const std::size_t rows = x.rows();
    if (tape) {
        tape->x = x;
        tape->pre.assign(c.n_hidden_layers, Matrix());
    }
    Matrix cur = x;
    for (std::size_t l = 0; l < c.n_hidden_layers; ++l) {
        const DenseParam& dp = p.dense[l];
        Matrix y(rows, dp.w.cols());
        blas::gemm(cur.data(), dp.w.data(), y.data(), rows, dp.w.rows(), dp.w.cols());
        for (std::size_t r = 0; r < rows; ++r) {
            double* yr = y.row(r);
            for (std::size_t j = 0; j < dp.w.cols(); ++j) yr[j] += dp.b[j];
        }
        if (tape) tape->pre[l] = y;
        for (auto& v : y) v = v > 0.0 ? v : 0.0;
        cur = std::move(y);
    }
    const DenseParam& last = p.dense.back();
    out.resize(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double* xr = cur.row(r);
        double acc = last.b[0];
        for (std::size_t j = 0; j < last.w.rows(); ++j) acc += xr[j] * last.w(j, 0);
        out[r] = 1.0 / (1.0 + std::exp(-acc));
    }
    if (tape) tape->out = out;
}

// dout = dL/d(sigmoid output). Accumulates decoder gradients; when dx is
// non-null it receives dL/d(input rows).
inline void decoder_backward(const ParamSet& p, const NetworkConfig& c, const DecoderTape& tape,
                             const std::vector<double>& dout, ParamSet& grads, Matrix* dx) {
    const std::size_t rows = tape.x.rows();
    const std::size_t L = c.n_hidden_layers;

    // reconstruct last hidden activations from the stored pre-activations
    Matrix hidden = tape.pre[L - 1];
    for (auto& v : hidden) v = v > 0.0 ? v : 0.0;

    std::vector<double> dpre_out(rows);
    for (std::size_t r = 0; r < rows; ++r) {
        const double s = tape.out[r];
        dpre_out[r] = dout[r] * s * (1.0 - s);
    }

    const DenseParam& last = p.dense.back();
    DenseParam& glast = grads.dense.back();
    for (std::size_t r = 0; r < rows; ++r) {
        const double g = dpre_out[r];
        if (g == 0.0) continue;
        const double* hr = hidden.row(r);
        for (std::size_t j = 0; j < last.w.rows(); ++j) glast.w(j, 0) += g * hr[j];
        glast.b[0] += g;
    }

    Matrix dh(rows, c.hidden_width);
    for (std::size_t r = 0; r < rows; ++r) {
        const double g = dpre_out[r];
        double* dr = dh.row(r);
        for (std::size_t j = 0; j < c.hidden_width; ++j) dr[j] = g * last.w(j, 0);
    }

    for (std::size_t l = L; l-- > 0;) {
        // gate by this layer's pre-activation
        const Matrix& pre = tape.pre[l];
        for (std::size_t i = 0; i < dh.size(); ++i)
            if (pre[i] <= 0.0) dh[i] = 0.0;

        const Matrix& input =
            l == 0 ? tape.x : tape.pre[l - 1]; // pre[l-1] rectified below
        const DenseParam& dp = p.dense[l];
        DenseParam& gp = grads.dense[l];

        if (l == 0) {
            blas::gemm_at_acc(input.data(), dh.data(), gp.w.data(), dp.w.rows(), rows,
                              dp.w.cols());
        } else {
            Matrix act = input;
            for (auto& v : act) v = v > 0.0 ? v : 0.0;
            blas::gemm_at_acc(act.data(), dh.data(), gp.w.data(), dp.w.rows(), rows,
                              dp.w.cols());
        }
        for (std::size_t r = 0; r < rows; ++r) {
            const double* dr = dh.row(r);
            for (std::size_t j = 0; j < dp.w.cols(); ++j) gp.b[j] += dr[j];
        }

        if (l == 0) {
            if (dx) {
                dx->resize(rows, dp.w.rows());
                blas::gemm_bt(dh.data(), dp.w.data(), dx->data(), rows, dp.w.cols(),
                              dp.w.rows());
            }
        } else {
            Matrix dnext(rows, dp.w.rows());
            blas::gemm_bt(dh.data(), dp.w.data(), dnext.data(), rows, dp.w.cols(),
                          dp.w.rows());
            dh = std::move(dnext);
        }
    }
}

// --- local ensemble ------------------------------------------------------

struct CornerSet {
    std::size_t i[4];
    std::size_t j[4];
    double weight[4];
    double dt[4];
    double dmu[4];
};

// Four nearest latent sites of the uniform cell-center chart; weights are the
// areas of the diagonally opposite rectangles, i.e. bilinear coefficients.
// Out-of-hull coordinates clamp to the hull boundary first, so boundary and
// beyond-boundary queries coincide.
inline CornerSet locate_corners(const LatentGrid& g, double x_t, double x_mu) {
    if (g.h < 2 || g.w < 2)
        throw invariant_error("query: degenerate latent cell (need at least 2x2 sites)");
    auto axis = [](double x, const std::vector<double>& coords, std::size_t& i0,
                   double& frac, double& xc) {
        const std::size_t m = coords.size();
        xc = x < coords.front() ? coords.front() : (x > coords.back() ? coords.back() : x);
        double u = (xc + 1.0) * static_cast<double>(m) / 2.0 - 0.5;
        if (u < 0.0) u = 0.0;
        if (u > static_cast<double>(m - 1)) u = static_cast<double>(m - 1);
        std::size_t i = static_cast<std::size_t>(u);
        if (i > m - 2) i = m - 2;
        i0 = i;
        frac = u - static_cast<double>(i);
    };
    std::size_t i0, j0;
    double ft, fm;
    axis(x_t, g.t_coords, i0, ft, x_t);
    axis(x_mu, g.mu_coords, j0, fm, x_mu);

    CornerSet cs;
    const double w00 = (1.0 - ft) * (1.0 - fm);
    const double w01 = (1.0 - ft) * fm;
    const double w10 = ft * (1.0 - fm);
    const double w11 = ft * fm;
    const std::size_t ii[4] = {i0, i0, i0 + 1, i0 + 1};
    const std::size_t jj[4] = {j0, j0 + 1, j0, j0 + 1};
    const double ww[4] = {w00, w01, w10, w11};
    for (int t = 0; t < 4; ++t) {
        cs.i[t] = ii[t];
        cs.j[t] = jj[t];
        cs.weight[t] = ww[t];
        cs.dt[t] = x_t - g.t_coords[ii[t]];
        cs.dmu[t] = x_mu - g.mu_coords[jj[t]];
    }
    return cs;
}

// Ensemble with an arbitrary per-corner decoder; the test harness passes a
// value-channel pass-through here to prove bilinear equivalence.
template <typename F>
double query_with(const LatentGrid& g, double x_t, double x_mu, double cell_t, double cell_mu,
                  F&& decode) {
    const CornerSet cs = locate_corners(g, x_t, x_mu);
    double acc = 0.0;
    for (int t = 0; t < 4; ++t)
        acc += cs.weight[t] *
               decode(g, cs.i[t], cs.j[t], cs.dt[t], cs.dmu[t], cell_t, cell_mu);
    return acc;
}

namespace detail {

inline void gather_row(const LatentGrid& g, std::size_t i, std::size_t j, double dt,
                       double dmu, double cell_t, double cell_mu, double* row) {
    const std::size_t hw = g.h * g.w;
    const std::size_t off = i * g.w + j;
    for (std::size_t c = 0; c < g.d; ++c) row[c] = g.data[c * hw + off];
    row[g.d] = dt;
    row[g.d + 1] = dmu;
    row[g.d + 2] = cell_t;
    row[g.d + 3] = cell_mu;
}

} // namespace detail

inline double query(const NetworkState& s, const LatentGrid& g, double x_t, double x_mu,
                    double cell_t, double cell_mu) {
    if (g.d != s.config.latent_channels)
        throw invariant_error("query: latent depth does not match config");
    const CornerSet cs = locate_corners(g, x_t, x_mu);
    Matrix x(4, s.config.decoder_input());
    for (int t = 0; t < 4; ++t)
        detail::gather_row(g, cs.i[t], cs.j[t], cs.dt[t], cs.dmu[t], cell_t, cell_mu,
                           x.row(t));
    std::vector<double> out;
    decoder_forward(s.params, s.config, x, out, nullptr);
    double acc = 0.0;
    for (int t = 0; t < 4; ++t) acc += cs.weight[t] * out[t];
    return acc;
}

// Batched prediction on a rectangular target chart. Targets are processed in
// fixed-size chunks; results do not depend on the chunking.
inline constexpr std::size_t kQueryChunk = 1024;

inline Matrix predict_grid(const NetworkState& s, const LatentGrid& g,
                           const std::vector<double>& target_t,
                           const std::vector<double>& target_mu, double cell_t,
                           double cell_mu) {
    if (g.d != s.config.latent_channels)
        throw invariant_error("predict_grid: latent depth does not match config");
    const std::size_t rows = target_t.size();
    const std::size_t cols = target_mu.size();
    Matrix out(rows, cols);
    const std::size_t total = rows * cols;
    Matrix x;
    std::vector<double> dec;
    std::vector<CornerSet> corners(kQueryChunk);
    for (std::size_t base = 0; base < total; base += kQueryChunk) {
        const std::size_t n = std::min(kQueryChunk, total - base);
        x.resize(4 * n, s.config.decoder_input());
        for (std::size_t q = 0; q < n; ++q) {
            const std::size_t idx = base + q;
            const double xt = target_t[idx / cols];
            const double xm = target_mu[idx % cols];
            corners[q] = locate_corners(g, xt, xm);
            for (int t = 0; t < 4; ++t)
                detail::gather_row(g, corners[q].i[t], corners[q].j[t], corners[q].dt[t],
                                   corners[q].dmu[t], cell_t, cell_mu, x.row(4 * q + t));
        }
        decoder_forward(s.params, s.config, x, dec, nullptr);
        for (std::size_t q = 0; q < n; ++q) {
            double acc = 0.0;
            for (int t = 0; t < 4; ++t) acc += corners[q].weight[t] * dec[4 * q + t];
            out[base + q] = acc;
        }
    }
    return out;
}

// Identity "encoder" for harness wiring: latents are the packed channels.
inline LatentGrid latent_from_grid(const data::Grid3& in) {
    LatentGrid g;
    g.d = 3;
    g.h = in.h;
    g.w = in.w;
    g.data = in.data;
    g.t_coords = data::chart(in.h);
    g.mu_coords = data::chart(in.w);
    return g;
}

// --- training-pair forward/backward --------------------------------------

// Grid of a sample's targets (row-major crop order) predicted by the network.
inline Matrix predict_sample(const NetworkState& s, const data::Sample& sample) {
    const std::size_t m = sample.input.h * sample.ratio;
    const LatentGrid g = encode(s, sample.input);
    return predict_grid(s, g, data::chart(m), data::chart(m), data::chart_cell(m),
                        data::chart_cell(m));
}

inline Matrix sample_truth(const data::Sample& sample) {
    const std::size_t m = sample.input.h * sample.ratio;
    Matrix truth(m, m);
    if (sample.targets.size() != m * m)
        throw invariant_error("sample_truth: target list is not a full grid");
    for (std::size_t i = 0; i < sample.targets.size(); ++i)
        truth[i] = sample.targets[i].value;
    return truth;
}

// Mean absolute error of one pair without building gradients.
inline double pair_loss(const NetworkState& s, const data::Sample& sample) {
    const LatentGrid g = encode(s, sample.input);
    const std::size_t total = sample.targets.size();
    if (total == 0) throw invariant_error("pair_loss: sample has no targets");
    Matrix x;
    std::vector<double> dec;
    std::vector<CornerSet> corners(kQueryChunk);
    double acc = 0.0;
    for (std::size_t base = 0; base < total; base += kQueryChunk) {
        const std::size_t n = std::min(kQueryChunk, total - base);
        x.resize(4 * n, s.config.decoder_input());
        for (std::size_t q = 0; q < n; ++q) {
            const data::Target& t = sample.targets[base + q];
            corners[q] = locate_corners(g, t.x_t, t.x_mu);
            for (int k = 0; k < 4; ++k)
                detail::gather_row(g, corners[q].i[k], corners[q].j[k], corners[q].dt[k],
                                   corners[q].dmu[k], t.cell_t, t.cell_mu, x.row(4 * q + k));
        }
        decoder_forward(s.params, s.config, x, dec, nullptr);
        for (std::size_t q = 0; q < n; ++q) {
            double pred = 0.0;
            for (int k = 0; k < 4; ++k) pred += corners[q].weight[k] * dec[4 * q + k];
            acc += std::fabs(pred - sample.targets[base + q].value);
        }
    }
    return acc / static_cast<double>(total);
}

// Forward + reverse over one pair. Returns the pair's mean absolute error;
// adds loss_scale * d(pair mean L1)/d(parameters) into `grads`.
inline double pair_grad(const NetworkState& s, const data::Sample& sample, ParamSet& grads,
                        double loss_scale) {
    const std::size_t total = sample.targets.size();
    if (total == 0) throw invariant_error("pair_grad: sample has no targets");
    EncoderTape tape;
    const LatentGrid g = encode(s, sample.input, &tape);
    const std::size_t hw = g.h * g.w;
    std::vector<double> dlatent(g.d * hw, 0.0);

    Matrix x, dx;
    std::vector<double> dec, dout;
    std::vector<CornerSet> corners(kQueryChunk);
    DecoderTape dtape;
    double acc = 0.0;
    const double per_target = loss_scale / static_cast<double>(total);

    for (std::size_t base = 0; base < total; base += kQueryChunk) {
        const std::size_t n = std::min(kQueryChunk, total - base);
        x.resize(4 * n, s.config.decoder_input());
        for (std::size_t q = 0; q < n; ++q) {
            const data::Target& t = sample.targets[base + q];
            corners[q] = locate_corners(g, t.x_t, t.x_mu);
            for (int k = 0; k < 4; ++k)
                detail::gather_row(g, corners[q].i[k], corners[q].j[k], corners[q].dt[k],
                                   corners[q].dmu[k], t.cell_t, t.cell_mu, x.row(4 * q + k));
        }
        decoder_forward(s.params, s.config, x, dec, &dtape);

        dout.assign(4 * n, 0.0);
        for (std::size_t q = 0; q < n; ++q) {
            double pred = 0.0;
            for (int k = 0; k < 4; ++k) pred += corners[q].weight[k] * dec[4 * q + k];
            const double err = pred - sample.targets[base + q].value;
            acc += std::fabs(err);
            const double sgn = err > 0.0 ? 1.0 : (err < 0.0 ? -1.0 : 0.0);
            const double dpred = sgn * per_target;
            for (int k = 0; k < 4; ++k) dout[4 * q + k] = dpred * corners[q].weight[k];
        }

        decoder_backward(s.params, s.config, dtape, dout, grads, &dx);
        for (std::size_t q = 0; q < n; ++q)
            for (int k = 0; k < 4; ++k) {
                const double* row = dx.row(4 * q + k);
                const std::size_t off = corners[q].i[k] * g.w + corners[q].j[k];
                for (std::size_t c = 0; c < g.d; ++c) dlatent[c * hw + off] += row[c];
            }
    }

    encode_backward(s, sample.input, tape, dlatent, grads);
    return acc / static_cast<double>(total);
}

} // namespace nniqs::net

#endif
