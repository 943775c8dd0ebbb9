// Condensate phase diagrams over a (T/g, mu/g) grid: generation, min-max
// normalization, transition-band extraction, comparison against the analytic
// curve. Rows index T ascending, columns index mu ascending.
#ifndef NNIQS_PHASE_HPP
#define NNIQS_PHASE_HPP

#include <cmath>
#include <cstdint>
#include <vector>

#include "nniqs/analytic.hpp"
#include "nniqs/core.hpp"
#include "nniqs/tensor.hpp"
#include "nniqs/thermal.hpp"

namespace nniqs::phase {

struct AxisGrid {
    std::vector<double> t_values;  // T/g, first >= 0.1
    std::vector<double> mu_values; // mu/g, first = 0 for full diagrams

    void validate() const {
        if (t_values.empty() || mu_values.empty())
            throw invariant_error("AxisGrid: axes must be non-empty");
        if (t_values.front() < 0.1)
            throw invariant_error("AxisGrid: temperature axis must start at or above 0.1");
        for (std::size_t i = 1; i < t_values.size(); ++i)
            if (t_values[i] <= t_values[i - 1])
                throw invariant_error("AxisGrid: temperature axis must be strictly increasing");
        for (std::size_t j = 1; j < mu_values.size(); ++j)
            if (mu_values[j] <= mu_values[j - 1])
                throw invariant_error("AxisGrid: chemical-potential axis must be strictly increasing");
        if (mu_values.front() < 0.0)
            throw invariant_error("AxisGrid: chemical-potential axis must start at or above 0");
    }

    // Uniform rows x cols grid over [t_min, t_max] x [0, mu_max].
    static AxisGrid linear(std::size_t rows, std::size_t cols, double t_min = 0.1,
                           double t_max = 2.5, double mu_max = 1.4) {
        if (rows < 2 || cols < 2)
            throw invariant_error("AxisGrid::linear: need at least 2 points per axis");
        AxisGrid g;
        g.t_values.resize(rows);
        g.mu_values.resize(cols);
        for (std::size_t i = 0; i < rows; ++i)
            g.t_values[i] = t_min + (t_max - t_min) * static_cast<double>(i) /
                                        static_cast<double>(rows - 1);
        for (std::size_t j = 0; j < cols; ++j)
            g.mu_values[j] = mu_max * static_cast<double>(j) / static_cast<double>(cols - 1);
        // inclusive endpoints, exactly: the accumulated form above can land one
        // ulp short of the requested bound
        g.t_values.back() = t_max;
        g.mu_values.back() = mu_max;
        g.validate();
        return g;
    }
};

struct PhaseDiagram {
    spin::ModelParams params; // mu_over_g records the axis origin
    AxisGrid axes;
    Matrix values; // t_values.size() x mu_values.size(), units of g
    std::string generator_version = kGeneratorVersion;
};

struct TransitionMask {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> cells; // row-major, 1 = inside band

    bool at(std::size_t i, std::size_t j) const { return cells[i * cols + j] != 0; }
};

// One diagonalization set per mu column; columns are independent, so they
// fan out across threads with no shared mutable state.
inline PhaseDiagram generate(const spin::ModelParams& params, const AxisGrid& axes,
                             std::size_t n_threads = 1) {
    params.validate();
    axes.validate();
    const std::size_t rows = axes.t_values.size();
    const std::size_t cols = axes.mu_values.size();

    PhaseDiagram d;
    d.params = params;
    d.params.mu_over_g = axes.mu_values.front();
    d.axes = axes;
    d.values = Matrix(rows, cols);

    auto fill_column = [&](std::size_t j) {
        spin::ModelParams p = params;
        p.mu_over_g = axes.mu_values[j];
        const auto obs = thermal::prepare_observable(p);
        for (std::size_t i = 0; i < rows; ++i)
            d.values(i, j) = thermal::thermal_expectation(obs, axes.t_values[i]);
    };

    parallel_for(cols, n_threads, fill_column);

    for (std::size_t i = 0; i < d.values.size(); ++i)
        if (!std::isfinite(d.values[i]))
            throw numeric_error("generate: non-finite condensate value");
    return d;
}

inline Matrix minmax_normalize(const Matrix& grid) {
    if (grid.size() == 0) throw invariant_error("minmax_normalize: empty grid");
    double lo = grid[0];
    double hi = grid[0];
    for (double v : grid) {
        if (v < lo) lo = v;
        if (v > hi) hi = v;
    }
    if (!(hi > lo)) throw invariant_error("minmax_normalize: degenerate normalization");
    Matrix out(grid.rows(), grid.cols());
    const double inv = 1.0 / (hi - lo);
    for (std::size_t i = 0; i < grid.size(); ++i) out[i] = (grid[i] - lo) * inv;
    return out;
}

inline std::vector<double> minmax_normalize(const std::vector<double>& v) {
    Matrix m(1, v.size());
    std::copy(v.begin(), v.end(), m.begin());
    const Matrix n = minmax_normalize(m);
    return std::vector<double>(n.begin(), n.end());
}

// Band [0.4, 0.6] of a min-max-normalized grid, bounds inclusive.
inline TransitionMask transition_mask(const Matrix& normalized) {
    TransitionMask m;
    m.rows = normalized.rows();
    m.cols = normalized.cols();
    m.cells.resize(normalized.size());
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        const double v = normalized[i];
        if (v < 0.0 || v > 1.0)
            throw invariant_error("transition_mask: values must lie in [0,1]");
        m.cells[i] = (v >= 0.4 && v <= 0.6) ? 1 : 0;
    }
    return m;
}

struct TheoryComparison {
    std::vector<double> t_values;
    std::vector<double> simulated; // |mu=0 column|, min-max normalized
    std::vector<double> reference; // |analytic curve|, min-max normalized
    double max_abs_deviation = 0.0;
    double mean_abs_deviation = 0.0;
    std::size_t monotonicity_violations = 0; // both curves should decay with T
};

// mu = 0 column against the analytic curve on the shared T axis, both taken
// as magnitudes and min-max normalized before differencing.
inline TheoryComparison compare_to_theory(const PhaseDiagram& d) {
    if (d.axes.t_values.back() < 2.0)
        throw invariant_error("compare_to_theory: diagram must cover T/g up to at least 2.0");
    if (d.axes.mu_values.front() != 0.0)
        throw invariant_error("compare_to_theory: diagram must include the mu = 0 column");

    TheoryComparison c;
    c.t_values = d.axes.t_values;
    const std::size_t rows = d.axes.t_values.size();
    std::vector<double> sim(rows);
    for (std::size_t i = 0; i < rows; ++i) sim[i] = std::fabs(d.values(i, 0));
    std::vector<double> ref = analytic::analytic_condensate(d.axes.t_values);
    for (double& v : ref) v = std::fabs(v);
    c.simulated = minmax_normalize(sim);
    c.reference = minmax_normalize(ref);

    double acc = 0.0;
    for (std::size_t i = 0; i < rows; ++i) {
        const double dev = std::fabs(c.simulated[i] - c.reference[i]);
        acc += dev;
        if (dev > c.max_abs_deviation) c.max_abs_deviation = dev;
        if (i > 0 && (c.simulated[i] > c.simulated[i - 1] || c.reference[i] > c.reference[i - 1]))
            ++c.monotonicity_violations;
    }
    c.mean_abs_deviation = acc / static_cast<double>(rows);
    return c;
}

} // namespace nniqs::phase

#endif
