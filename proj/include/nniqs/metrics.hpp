// Evaluation metrics: PSNR over model-space grids, relative-error maps in
// physical units, and region statistics with the 1.5 IQR outlier rule.
#ifndef NNIQS_METRICS_HPP
#define NNIQS_METRICS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "nniqs/core.hpp"
#include "nniqs/dataset.hpp"
#include "nniqs/tensor.hpp"

namespace nniqs::metrics {

inline constexpr double kPsnrCap = 300.0;  // dB, applied when MSE < 1e-30
inline constexpr double kRelErrFloor = 1e-8; // units of g

// Model-space values have unit peak, so PSNR = -10 log10(MSE).
inline double psnr(const Matrix& pred, const Matrix& truth) {
    if (!pred.same_shape(truth)) throw invariant_error("psnr: shape mismatch");
    if (pred.size() == 0) throw invariant_error("psnr: empty grids");
    double acc = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - truth[i];
        acc += d * d;
    }
    const double mse = acc / static_cast<double>(pred.size());
    if (mse < 1e-30) return kPsnrCap;
    return -10.0 * std::log10(mse);
}

inline double psnr(const std::vector<double>& pred, const std::vector<double>& truth) {
    Matrix p(1, pred.size()), t(1, truth.size());
    std::copy(pred.begin(), pred.end(), p.begin());
    std::copy(truth.begin(), truth.end(), t.begin());
    return psnr(p, t);
}

struct RelativeErrorMap {
    Matrix errors; // dimensionless, physical-unit ratio
    std::size_t floored = 0; // points where |truth| fell below the floor
};

// Both inputs in model space; converted back to physical units before
// |p - g| / max(|g|, floor).
inline RelativeErrorMap relative_error_map(const Matrix& pred, const Matrix& truth) {
    if (!pred.same_shape(truth)) throw invariant_error("relative_error_map: shape mismatch");
    RelativeErrorMap out;
    out.errors = Matrix(pred.rows(), pred.cols());
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double p = data::from_model_space(pred[i]);
        const double g = data::from_model_space(truth[i]);
        double denom = std::fabs(g);
        if (denom < kRelErrFloor) {
            denom = kRelErrFloor;
            ++out.floored;
        }
        out.errors[i] = std::fabs(p - g) / denom;
    }
    return out;
}

// Quartile by linear interpolation between order statistics of sorted data:
// rank h = q (n - 1).
inline double quantile_sorted(const std::vector<double>& sorted, double q) {
    if (sorted.empty()) throw invariant_error("quantile: empty data");
    if (sorted.size() == 1) return sorted[0];
    const double h = q * static_cast<double>(sorted.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

struct ErrorReport {
    std::string mask_kind = "whole"; // whole | transition
    std::string scenario;
    double mean = 0.0;
    double median = 0.0;
    double q1 = 0.0;
    double q3 = 0.0;
    double max_after_trim = 0.0;
    std::size_t total_count = 0;   // masked finite entries before trimming
    std::size_t trimmed_count = 0; // dropped by the IQR rule
    std::size_t floored_count = 0; // carried from the relative-error map
};

// Statistics over masked entries after dropping values outside
// [Q1 - 1.5 IQR, Q3 + 1.5 IQR]; quartiles of the report are recomputed on
// the surviving values.
inline ErrorReport region_stats(const Matrix& errors, const std::vector<std::uint8_t>& mask,
                                const std::string& mask_kind = "whole") {
    if (!mask.empty() && mask.size() != errors.size())
        throw invariant_error("region_stats: mask shape mismatch");
    std::vector<double> vals;
    vals.reserve(errors.size());
    for (std::size_t i = 0; i < errors.size(); ++i) {
        if (!mask.empty() && mask[i] == 0) continue;
        if (!std::isfinite(errors[i])) continue;
        vals.push_back(errors[i]);
    }
    if (vals.empty()) throw invariant_error("region_stats: empty mask");
    std::sort(vals.begin(), vals.end());

    const double q1 = quantile_sorted(vals, 0.25);
    const double q3 = quantile_sorted(vals, 0.75);
    const double iqr = q3 - q1;
    const double lo = q1 - 1.5 * iqr;
    const double hi = q3 + 1.5 * iqr;

    std::vector<double> kept;
    kept.reserve(vals.size());
    for (double v : vals)
        if (v >= lo && v <= hi) kept.push_back(v);

    ErrorReport r;
    r.mask_kind = mask_kind;
    r.total_count = vals.size();
    r.trimmed_count = vals.size() - kept.size();
    double acc = 0.0;
    for (double v : kept) acc += v;
    r.mean = acc / static_cast<double>(kept.size());
    r.median = quantile_sorted(kept, 0.5);
    r.q1 = quantile_sorted(kept, 0.25);
    r.q3 = quantile_sorted(kept, 0.75);
    r.max_after_trim = kept.back();
    return r;
}

inline ErrorReport region_stats(const Matrix& errors) {
    return region_stats(errors, {}, "whole");
}

} // namespace nniqs::metrics

#endif
