// Dataset preparation: sigmoid value transform, 3-channel packing, the two
// crop strategies, random down-sampling, pair synthesis for training, and
// diagram-level splits. Everything is a pure function of (inputs, seed).
#ifndef NNIQS_DATASET_HPP
#define NNIQS_DATASET_HPP

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nniqs/core.hpp"
#include "nniqs/phase.hpp"
#include "nniqs/tensor.hpp"

namespace nniqs::data {

// --- value transform ---------------------------------------------------

// Model space is sigmoid space. Split evaluation keeps both branches away
// from catastrophic cancellation; the inverse is still conditioning-limited
// near 1 (relative resolution of 1-s), which production values (< 0) never
// approach.
inline double to_model_space(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

inline double from_model_space(double s) {
    if (!(s > 0.0) || !(s < 1.0))
        throw invariant_error("from_model_space: value saturated outside (0,1)");
    return std::log(s) - std::log1p(-s);
}

inline Matrix to_model_space(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = to_model_space(m[i]);
    return out;
}

inline Matrix from_model_space(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.size(); ++i) out[i] = from_model_space(m[i]);
    return out;
}

// --- coordinate chart ---------------------------------------------------

// Cell-center chart of an m-point axis over [-1, 1]; cell width is 2/m.
inline double chart_coord(std::size_t i, std::size_t m) {
    return -1.0 + (2.0 * static_cast<double>(i) + 1.0) / static_cast<double>(m);
}

inline std::vector<double> chart(std::size_t m) {
    std::vector<double> c(m);
    for (std::size_t i = 0; i < m; ++i) c[i] = chart_coord(i, m);
    return c;
}

inline double chart_cell(std::size_t m) { return 2.0 / static_cast<double>(m); }

// --- channel packing ----------------------------------------------------

inline constexpr double kPlaceholderChannel = 1e-3;

// Channel-major 3 x h x w block; channel 0 carries the model-space field.
struct Grid3 {
    std::size_t h = 0;
    std::size_t w = 0;
    std::vector<double> data;

    double& at(std::size_t c, std::size_t i, std::size_t j) { return data[(c * h + i) * w + j]; }
    double at(std::size_t c, std::size_t i, std::size_t j) const {
        return data[(c * h + i) * w + j];
    }
};

inline Grid3 pack(const Matrix& model_values) {
    for (double v : model_values)
        if (!(v > 0.0) || !(v < 1.0))
            throw invariant_error("pack: channel-0 values must lie in (0,1)");
    Grid3 g;
    g.h = model_values.rows();
    g.w = model_values.cols();
    g.data.assign(3 * g.h * g.w, kPlaceholderChannel);
    std::copy(model_values.begin(), model_values.end(), g.data.begin());
    return g;
}

inline Matrix unpack(const Grid3& g) {
    Matrix m(g.h, g.w);
    std::copy(g.data.begin(), g.data.begin() + static_cast<std::ptrdiff_t>(g.h * g.w),
              m.begin());
    return m;
}

// --- cropping and down-sampling ----------------------------------------

enum class CropStrategy { ContiguousBlock, RandomCoordinates };

struct CropSpec {
    CropStrategy strategy = CropStrategy::ContiguousBlock;
    std::size_t side = 0;
    std::uint64_t seed = 0;
};

// Sub-diagram from explicit row/column index lists; true physical axis
// values travel with the selection.
inline phase::PhaseDiagram take_indices(const phase::PhaseDiagram& d,
                                        const std::vector<std::size_t>& row_ids,
                                        const std::vector<std::size_t>& col_ids) {
    if (row_ids.empty() || col_ids.empty())
        throw invariant_error("take_indices: empty index list");
    phase::PhaseDiagram out;
    out.params = d.params;
    out.generator_version = d.generator_version;
    out.axes.t_values.reserve(row_ids.size());
    out.axes.mu_values.reserve(col_ids.size());
    for (std::size_t i : row_ids) {
        if (i >= d.values.rows()) throw invariant_error("take_indices: row out of range");
        out.axes.t_values.push_back(d.axes.t_values[i]);
    }
    for (std::size_t j : col_ids) {
        if (j >= d.values.cols()) throw invariant_error("take_indices: column out of range");
        out.axes.mu_values.push_back(d.axes.mu_values[j]);
    }
    out.values = Matrix(row_ids.size(), col_ids.size());
    for (std::size_t i = 0; i < row_ids.size(); ++i)
        for (std::size_t j = 0; j < col_ids.size(); ++j)
            out.values(i, j) = d.values(row_ids[i], col_ids[j]);
    out.params.mu_over_g = out.axes.mu_values.front();
    return out;
}

inline std::vector<std::size_t> iota_indices(std::size_t from, std::size_t count) {
    std::vector<std::size_t> ids(count);
    for (std::size_t i = 0; i < count; ++i) ids[i] = from + i;
    return ids;
}

// Draw order is fixed: ContiguousBlock draws row origin then column origin;
// RandomCoordinates draws the row index set then the column index set.
inline phase::PhaseDiagram crop(const phase::PhaseDiagram& d, const CropSpec& spec) {
    if (spec.side == 0 || spec.side > d.values.rows() || spec.side > d.values.cols())
        throw invariant_error("crop: side exceeds source grid");
    rng::Stream stream(spec.seed);
    if (spec.strategy == CropStrategy::ContiguousBlock) {
        const std::size_t r0 = stream.uniform_index(d.values.rows() - spec.side + 1);
        const std::size_t c0 = stream.uniform_index(d.values.cols() - spec.side + 1);
        return take_indices(d, iota_indices(r0, spec.side), iota_indices(c0, spec.side));
    }
    const auto rows = stream.sample_distinct_sorted(d.values.rows(), spec.side);
    const auto cols = stream.sample_distinct_sorted(d.values.cols(), spec.side);
    return take_indices(d, rows, cols);
}

// Selection only, never resampling: r_i distinct sorted indices per axis.
inline phase::PhaseDiagram downsample_random(const phase::PhaseDiagram& d, std::size_t r_i,
                                             std::uint64_t seed) {
    if (r_i == 0 || r_i > d.values.rows() || r_i > d.values.cols())
        throw invariant_error("downsample_random: count exceeds source grid");
    rng::Stream stream(seed);
    const auto rows = stream.sample_distinct_sorted(d.values.rows(), r_i);
    const auto cols = stream.sample_distinct_sorted(d.values.cols(), r_i);
    return take_indices(d, rows, cols);
}

// --- dataset specification ----------------------------------------------

struct DatasetSpec {
    std::vector<std::size_t> n_values = {6, 8, 10};
    std::vector<double> w_over_g_values;
    std::size_t r_ground = 196;
    std::size_t r_input = 48;
    std::size_t r_max = 4;
    double split_fraction = 0.9;
    std::uint64_t master_seed = 0;
    double t_min = 0.1;
    double t_max = 2.5;
    double mu_max = 1.4;

    void validate() const {
        if (n_values.empty()) throw invariant_error("DatasetSpec: n_values empty");
        for (std::size_t n : n_values)
            if (n != 6 && n != 8 && n != 10)
                throw invariant_error("DatasetSpec: n_values must be drawn from {6, 8, 10}");
        if (w_over_g_values.empty()) throw invariant_error("DatasetSpec: w_over_g_values empty");
        for (double w : w_over_g_values)
            if (w < 0.3 || w > 1.5)
                throw invariant_error("DatasetSpec: w/g must lie within [0.3, 1.5]");
        if (r_input >= r_ground) throw invariant_error("DatasetSpec: R_i must be below R_g");
        if (r_max < 2) throw invariant_error("DatasetSpec: r_max must be at least 2");
        if (r_input * r_max > r_ground)
            throw invariant_error("DatasetSpec: R_i * r_max exceeds R_g");
        if (!(split_fraction > 0.0 && split_fraction < 1.0))
            throw invariant_error("DatasetSpec: split fraction must lie in (0,1)");
        if (t_min < 0.1 || t_max <= t_min || mu_max <= 0.0)
            throw invariant_error("DatasetSpec: invalid axis ranges");
    }

    // 25 w/g values evenly spaced over [0.3, 1.5].
    static std::vector<double> default_w_values() {
        std::vector<double> w(25);
        for (std::size_t i = 0; i < w.size(); ++i)
            w[i] = 0.3 + 1.2 * static_cast<double>(i) / 24.0;
        return w;
    }
};

// Ground-truth diagrams in n-major, then w-major order; ids follow this
// enumeration.
inline std::vector<phase::PhaseDiagram> generate_diagrams(const DatasetSpec& spec,
                                                          std::size_t n_threads = 1) {
    spec.validate();
    const auto axes = phase::AxisGrid::linear(spec.r_ground, spec.r_ground, spec.t_min,
                                              spec.t_max, spec.mu_max);
    std::vector<phase::PhaseDiagram> out;
    out.reserve(spec.n_values.size() * spec.w_over_g_values.size());
    for (std::size_t n : spec.n_values)
        for (double w : spec.w_over_g_values) {
            spin::ModelParams p;
            p.n_sites = n;
            p.w_over_g = w;
            out.push_back(phase::generate(p, axes, n_threads));
        }
    return out;
}

// --- training pairs -----------------------------------------------------

struct Target {
    double x_t = 0.0; // coordinates in the crop's cell-center chart
    double x_mu = 0.0;
    double cell_t = 0.0;
    double cell_mu = 0.0;
    double value = 0.0; // model space
};

struct Sample {
    Grid3 input; // 3 x r_input x r_input
    std::vector<double> in_t_coords;
    std::vector<double> in_mu_coords;
    std::vector<Target> targets; // row-major over the crop
    std::size_t diagram_id = 0;
    std::size_t crop_row0 = 0;
    std::size_t crop_col0 = 0;
    std::size_t ratio = 0;
};

// One training pair: ratio drawn from [lo, hi], contiguous (r_input*r)^2
// crop, random down-sample to r_input^2, all crop points as targets. The
// input grid is presented on the uniform chart regardless of which indices
// survived the down-sample; the distortion is part of the learning task.
// max_targets > 0 keeps a random row-major subset of that many targets; 0
// keeps them all and draws nothing extra from the stream.
inline Sample make_pair(const phase::PhaseDiagram& d, std::size_t diagram_id,
                        std::size_t r_input, std::size_t ratio_lo, std::size_t ratio_hi,
                        rng::Stream& stream, std::size_t max_targets = 0) {
    if (ratio_lo < 1 || ratio_lo > ratio_hi)
        throw invariant_error("make_pair: invalid ratio range");
    if (r_input * ratio_hi > d.values.rows() || r_input * ratio_hi > d.values.cols())
        throw invariant_error("make_pair: ratio exceeds ground-truth resolution");

    Sample s;
    s.diagram_id = diagram_id;
    s.ratio = ratio_lo + stream.uniform_index(ratio_hi - ratio_lo + 1);
    const std::size_t side = r_input * s.ratio;
    s.crop_row0 = stream.uniform_index(d.values.rows() - side + 1);
    s.crop_col0 = stream.uniform_index(d.values.cols() - side + 1);
    const auto sub =
        take_indices(d, iota_indices(s.crop_row0, side), iota_indices(s.crop_col0, side));

    const auto rows = stream.sample_distinct_sorted(side, r_input);
    const auto cols = stream.sample_distinct_sorted(side, r_input);
    const auto input_d = take_indices(sub, rows, cols);
    s.input = pack(to_model_space(input_d.values));
    s.in_t_coords = chart(r_input);
    s.in_mu_coords = chart(r_input);

    const double cell = chart_cell(side);
    s.targets.reserve(side * side);
    for (std::size_t i = 0; i < side; ++i)
        for (std::size_t j = 0; j < side; ++j)
            s.targets.push_back(Target{chart_coord(i, side), chart_coord(j, side), cell, cell,
                                       to_model_space(sub.values(i, j))});
    if (max_targets > 0 && max_targets < s.targets.size()) {
        const auto keep = stream.sample_distinct_sorted(s.targets.size(), max_targets);
        std::vector<Target> subset;
        subset.reserve(keep.size());
        for (std::size_t k : keep) subset.push_back(s.targets[k]);
        s.targets = std::move(subset);
    }
    return s;
}

// Fixed-ratio variant used for validation and benchmarking.
inline Sample make_pair_fixed(const phase::PhaseDiagram& d, std::size_t diagram_id,
                              std::size_t r_input, std::size_t ratio, rng::Stream& stream) {
    return make_pair(d, diagram_id, r_input, ratio, ratio, stream);
}

// Pairs cycle round-robin over diagrams; pair p draws from its own stream
// derived from (seed, p) so generation order and thread count are
// irrelevant.
inline std::vector<Sample> make_pairs(const std::vector<phase::PhaseDiagram>& diagrams,
                                      const std::vector<std::size_t>& diagram_ids,
                                      std::size_t r_input, std::size_t ratio_lo,
                                      std::size_t ratio_hi, std::size_t n_pairs,
                                      std::uint64_t seed, std::size_t max_targets = 0) {
    if (diagram_ids.empty()) throw invariant_error("make_pairs: no source diagrams");
    std::vector<Sample> out;
    out.reserve(n_pairs);
    for (std::size_t p = 0; p < n_pairs; ++p) {
        const std::size_t id = diagram_ids[p % diagram_ids.size()];
        rng::Stream stream(rng::derive_seed(seed, p));
        out.push_back(
            make_pair(diagrams.at(id), id, r_input, ratio_lo, ratio_hi, stream, max_targets));
    }
    return out;
}

// --- splits -------------------------------------------------------------

struct Split {
    std::vector<std::size_t> train_ids;
    std::vector<std::size_t> val_ids;
};

// Diagram-level split: floor(fraction * count) to train, remainder to
// validation, membership by seeded shuffle.
inline Split split(std::size_t count, double fraction, std::uint64_t seed) {
    if (!(fraction > 0.0 && fraction < 1.0))
        throw invariant_error("split: fraction must lie in (0,1)");
    const std::size_t n_train = static_cast<std::size_t>(
        std::floor(fraction * static_cast<double>(count)));
    if (n_train == 0 || n_train == count)
        throw invariant_error("split: a side would be empty");
    std::vector<std::size_t> ids(count);
    for (std::size_t i = 0; i < count; ++i) ids[i] = i;
    rng::Stream stream(seed);
    stream.shuffle(ids);
    Split s;
    s.train_ids.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_train));
    s.val_ids.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_train), ids.end());
    std::sort(s.train_ids.begin(), s.train_ids.end());
    std::sort(s.val_ids.begin(), s.val_ids.end());
    return s;
}

} // namespace nniqs::data

#endif
