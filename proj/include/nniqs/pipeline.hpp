// Experiment assembly: dataset bundles with diagram-level splits, training
// and whole-diagram evaluation pairs, the shared upscaling protocol for the
// network and the classical baselines, scenario runners, and JSON/CSV report
// plumbing. Baselines receive the same input presentation as the network
// (model-space values on the uniform chart) and target coordinates are
// clamped to the input hull exactly as the network clamps its queries.
#ifndef NNIQS_PIPELINE_HPP
#define NNIQS_PIPELINE_HPP

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nniqs/checkpoint.hpp"
#include "nniqs/core.hpp"
#include "nniqs/dataset.hpp"
#include "nniqs/interp.hpp"
#include "nniqs/metrics.hpp"
#include "nniqs/net.hpp"
#include "nniqs/optim.hpp"
#include "nniqs/phase.hpp"
#include "nniqs/phd1.hpp"

namespace nniqs::pipeline {

namespace detail {

inline constexpr std::uint64_t kSplitSalt = 0x73706c6974000000ull;
inline constexpr std::uint64_t kPairSalt = 0x7061697273000000ull;
inline constexpr std::uint64_t kValSalt = 0x76616c0000000000ull;
inline constexpr std::uint64_t kEvalSalt = 0x6576616c00000000ull;

} // namespace detail

// --- presets --------------------------------------------------------------

// Bundle of everything one experiment needs: the dataset recipe, the network
// and the training schedule, plus pair counts and evaluation ratios.
struct ExperimentConfig {
    data::DatasetSpec dataset;
    net::NetworkConfig network;
    optim::TrainingConfig training;
    std::size_t n_train_pairs = 0;
    std::size_t max_targets_per_pair = 0; // 0 = keep every crop point
    std::vector<std::size_t> eval_ratios;
};

// Reduced-scale configuration sized for a desktop CPU run of a couple of
// hours; the full-scale counterpart below is a compute-bound reference.
inline ExperimentConfig desk_config() {
    ExperimentConfig c;
    c.dataset.n_values = {6, 8};
    c.dataset.w_over_g_values = {0.3, 0.54, 0.78, 1.02, 1.26, 1.5};
    c.dataset.r_ground = 96;
    c.dataset.r_input = 24;
    c.dataset.r_max = 4;
    c.dataset.split_fraction = 0.9; // 10 train / 2 validation diagrams
    c.dataset.master_seed = 7;
    c.network = net::NetworkConfig::standard();
    c.training.seed = 42;
    c.training.epochs = 200;
    c.training.learning_rate = 2e-3;
    c.training.milestones = {30, 60, 90, 120, 150, 170, 185, 195};
    c.training.batch_pairs = 4;
    c.training.threads = 4;
    c.n_train_pairs = 48;
    c.max_targets_per_pair = 2048;
    c.eval_ratios = {2, 3, 4};
    return c;
}

inline ExperimentConfig paper_config() {
    ExperimentConfig c;
    c.dataset.n_values = {6, 8, 10};
    c.dataset.w_over_g_values = data::DatasetSpec::default_w_values();
    c.dataset.r_ground = 196;
    c.dataset.r_input = 48;
    c.dataset.r_max = 4;
    c.dataset.split_fraction = 0.9; // 67 train / 8 validation diagrams
    c.network = net::NetworkConfig::standard();
    c.training = optim::TrainingConfig{};
    c.n_train_pairs = 256;
    c.eval_ratios = {2, 3, 4};
    return c;
}

/// Unseen-coupling protocol: train and validate inside [0.5, 1.3], test on
// couplings outside that band.
inline ExperimentConfig unseenw_config() {
    ExperimentConfig c = desk_config();
    c.dataset.w_over_g_values = {0.5, 0.66, 0.82, 0.98, 1.14, 1.3};
    return c;
}

inline std::vector<double> unseenw_test_w_values() { return {0.3, 0.45, 1.35, 1.5}; }

// --- dataset bundle -------------------------------------------------------

struct DatasetBundle {
    data::DatasetSpec spec;
    std::vector<phase::PhaseDiagram> diagrams;
    data::Split split;
};

inline DatasetBundle build_dataset(const data::DatasetSpec& spec, std::size_t threads = 1) {
    DatasetBundle b;
    b.spec = spec;
    b.diagrams = data::generate_diagrams(spec, threads);
    b.split = data::split(b.diagrams.size(), spec.split_fraction,
                          rng::derive_seed(spec.master_seed, detail::kSplitSalt));
    return b;
}

// --- pair assembly --------------------------------------------------------

inline std::vector<data::Sample> training_pairs(const DatasetBundle& b, std::size_t n_pairs,
                                                std::uint64_t seed,
                                                std::size_t max_targets = 0) {
    return data::make_pairs(b.diagrams, b.split.train_ids, b.spec.r_input, 1, b.spec.r_max,
                            n_pairs, rng::derive_seed(seed, detail::kPairSalt), max_targets);
}

// Whole-diagram pair at an exact divisor ratio: the crop is the full grid
// and the input is its random down-sample to side/ratio points per axis.
inline data::Sample whole_diagram_pair(const phase::PhaseDiagram& d, std::size_t diagram_id,
                                       std::size_t ratio, std::uint64_t seed) {
    const std::size_t side = d.values.rows();
    if (ratio == 0 || side % ratio != 0)
        throw invariant_error("whole_diagram_pair: ratio must divide the grid side");
    rng::Stream stream(seed);
    return data::make_pair_fixed(d, diagram_id, side / ratio, ratio, stream);
}

// One pair per (validation diagram, ratio), covering the full diagram.
inline std::vector<data::Sample> validation_pairs(const DatasetBundle& b,
                                                  const std::vector<std::size_t>& ratios,
                                                  std::uint64_t seed) {
    std::vector<data::Sample> out;
    out.reserve(b.split.val_ids.size() * ratios.size());
    for (std::size_t id : b.split.val_ids)
        for (std::size_t r : ratios)
            out.push_back(whole_diagram_pair(b.diagrams.at(id), id, r,
                                             rng::derive_seed(seed, detail::kValSalt +
                                                                        id * 16 + r)));
    return out;
}

// --- shared upscaling protocol --------------------------------------------

// Target chart clamped to the input chart's hull; identical to the clamp the
// network applies to its queries, so every method answers the same points.
inline std::vector<double> clamped_chart(std::size_t target_side, std::size_t input_side) {
    std::vector<double> t = data::chart(target_side);
    const std::vector<double> in = data::chart(input_side);
    for (double& x : t) x = std::clamp(x, in.front(), in.back());
    return t;
}

inline Matrix baseline_upscale(const Matrix& input_model, interp::Method method,
                               std::size_t target_side) {
    if (input_model.rows() != input_model.cols())
        throw invariant_error("baseline_upscale: input grid must be square");
    const std::vector<double> in_axis = data::chart(input_model.rows());
    const std::vector<double> targets = clamped_chart(target_side, input_model.rows());
    return interp::upscale_grid(input_model, in_axis, in_axis, method, targets, targets);
}

inline Matrix net_upscale(const net::NetworkState& s, const data::Grid3& input,
                          std::size_t target_side) {
    const net::LatentGrid g = net::encode(s, input);
    const std::vector<double> targets = data::chart(target_side);
    const double cell = data::chart_cell(target_side);
    return net::predict_grid(s, g, targets, targets, cell, cell);
}

// --- evaluation -----------------------------------------------------------

// One (diagram, ratio) evaluation instance: the down-sampled input, the full
// model-space truth, and the transition mask derived from the truth.
struct EvalCase {
    std::size_t diagram_id = 0;
    std::size_t ratio = 0;
    data::Grid3 input;
    Matrix truth_model;
    std::vector<std::uint8_t> transition;
};

// Same physics on a different grid resolution: identical parameters and axis
// bounds, side points per axis.
inline phase::PhaseDiagram simulate_at(const phase::PhaseDiagram& base, std::size_t side,
                                       std::size_t threads = 1) {
    const auto axes =
        phase::AxisGrid::linear(side, side, base.axes.t_values.front(),
                                base.axes.t_values.back(), base.axes.mu_values.back());
    return phase::generate(base.params, axes, threads);
}

// Fixed-input protocol: the input is always the base diagram down-sampled to
// input_side points per axis, and the truth for ratio r lives on a grid of
// side input_side*r simulated over the same axis bounds. All ratios for one
// diagram therefore share one input, and the comparison at each ratio is
// against an honest ground truth at that resolution.
inline EvalCase build_eval_case(const phase::PhaseDiagram& base, std::size_t diagram_id,
                                std::size_t ratio, std::size_t input_side,
                                std::uint64_t seed, std::size_t threads = 1) {
    const std::size_t base_side = base.values.rows();
    if (input_side == 0 || base_side % input_side != 0)
        throw invariant_error("build_eval_case: input side must divide the base grid");
    if (ratio == 0) throw invariant_error("build_eval_case: ratio must be positive");
    EvalCase c;
    c.diagram_id = diagram_id;
    c.ratio = ratio;
    c.input = whole_diagram_pair(base, diagram_id, base_side / input_side, seed).input;
    const std::size_t target_side = input_side * ratio;
    const phase::PhaseDiagram truth =
        target_side == base_side ? base : simulate_at(base, target_side, threads);
    c.truth_model = data::to_model_space(truth.values);
    c.transition = phase::transition_mask(phase::minmax_normalize(truth.values)).cells;
    return c;
}

struct MethodReport {
    std::string method; // nniqs | bilinear | axiscubic | bicubic
    std::size_t ratio = 0;
    double psnr_db = 0.0; // mean of per-diagram values
    metrics::ErrorReport whole;
    metrics::ErrorReport transition;
};

inline Matrix predict_case(const EvalCase& c, const std::string& method,
                           const net::NetworkState* state) {
    const std::size_t side = c.truth_model.rows();
    if (method == "nniqs") {
        if (!state) throw invariant_error("predict_case: nniqs method requires a network");
        return net_upscale(*state, c.input, side);
    }
    return baseline_upscale(data::unpack(c.input), interp::parse_method(method), side);
}

// Pooled statistics for one method at one ratio over a set of cases: error
// maps are stacked row-wise (region statistics are permutation invariant),
// PSNR is averaged per diagram.
inline MethodReport evaluate_method(const std::vector<EvalCase>& cases,
                                    const std::string& method, std::size_t ratio,
                                    const std::string& scenario,
                                    const net::NetworkState* state) {
    std::vector<const EvalCase*> selected;
    for (const auto& c : cases)
        if (c.ratio == ratio) selected.push_back(&c);
    if (selected.empty()) throw invariant_error("evaluate_method: no cases at this ratio");

    const std::size_t side = selected.front()->truth_model.rows();
    Matrix stacked(selected.size() * side, side);
    std::vector<std::uint8_t> mask(stacked.size(), 0);
    std::size_t floored = 0;
    double psnr_acc = 0.0;
    for (std::size_t k = 0; k < selected.size(); ++k) {
        const EvalCase& c = *selected[k];
        if (c.truth_model.rows() != side)
            throw invariant_error("evaluate_method: mixed grid sides at one ratio");
        const Matrix pred = predict_case(c, method, state);
        psnr_acc += metrics::psnr(pred, c.truth_model);
        const auto rel = metrics::relative_error_map(pred, c.truth_model);
        floored += rel.floored;
        std::copy(rel.errors.begin(), rel.errors.end(), stacked.begin() + k * side * side);
        std::copy(c.transition.begin(), c.transition.end(), mask.begin() + k * side * side);
    }

    MethodReport r;
    r.method = method;
    r.ratio = ratio;
    r.psnr_db = psnr_acc / static_cast<double>(selected.size());
    r.whole = metrics::region_stats(stacked);
    r.whole.scenario = scenario;
    r.whole.floored_count = floored;
    r.transition = metrics::region_stats(stacked, mask, "transition");
    r.transition.scenario = scenario;
    r.transition.floored_count = floored;
    return r;
}

inline const std::vector<std::string>& all_methods() {
    static const std::vector<std::string> m = {"nniqs", "bilinear", "axiscubic", "bicubic"};
    return m;
}

struct ScenarioResult {
    std::string scenario;
    std::vector<MethodReport> reports;
};

inline ScenarioResult run_cases(const std::vector<EvalCase>& cases,
                                const std::vector<std::size_t>& ratios,
                                const std::string& scenario, const net::NetworkState* state) {
    ScenarioResult res;
    res.scenario = scenario;
    for (std::size_t r : ratios)
        for (const std::string& m : all_methods())
            res.reports.push_back(evaluate_method(cases, m, r, scenario, state));
    return res;
}

// In-range scenario: validation diagrams of the training dataset at the
// trained ratios, input fixed at the training input side.
inline ScenarioResult run_basic(const net::NetworkState& state, const DatasetBundle& b,
                                const std::vector<std::size_t>& ratios, std::uint64_t seed,
                                std::size_t threads = 1) {
    std::vector<EvalCase> cases;
    for (std::size_t id : b.split.val_ids)
        for (std::size_t r : ratios)
            cases.push_back(build_eval_case(b.diagrams.at(id), id, r, b.spec.r_input,
                                            rng::derive_seed(seed, detail::kEvalSalt + id),
                                            threads));
    return run_cases(cases, ratios, "basic", &state);
}

// Beyond-ratio scenario: a held-out coupling on a finer grid, predicted at
// ratios past the trained range alongside the largest trained ratio. The
// input is the base grid down-sampled to r_input, so the largest ratio maps
// back onto the base grid itself.
struct BeyondSpec {
    std::size_t n_sites = 8;
    double w_over_g = 0.9; // absent from the desk training couplings
    std::size_t grid = 240;
    std::size_t r_input = 40;
    std::vector<std::size_t> ratios = {4, 6};
    double t_min = 0.1;
    double t_max = 2.5;
    double mu_max = 1.4;
};

inline phase::PhaseDiagram beyond_diagram(const BeyondSpec& s, std::size_t threads = 1) {
    spin::ModelParams p;
    p.n_sites = s.n_sites;
    p.w_over_g = s.w_over_g;
    const auto axes = phase::AxisGrid::linear(s.grid, s.grid, s.t_min, s.t_max, s.mu_max);
    return phase::generate(p, axes, threads);
}

inline ScenarioResult run_beyond(const net::NetworkState& state, const BeyondSpec& spec,
                                 std::uint64_t seed, std::size_t threads = 1) {
    const phase::PhaseDiagram d = beyond_diagram(spec, threads);
    std::vector<EvalCase> cases;
    for (std::size_t r : spec.ratios)
        cases.push_back(build_eval_case(d, 0, r, spec.r_input,
                                        rng::derive_seed(seed, detail::kEvalSalt), threads));
    return run_cases(cases, spec.ratios, "beyond", &state);
}

// Unseen-coupling scenario: the state should come from unseenw_config()
// training; test diagrams sit outside the trained coupling band.
inline ScenarioResult run_unseenw(const net::NetworkState& state, std::uint64_t seed,
                                  std::size_t threads = 1) {
    const ExperimentConfig cfg = unseenw_config();
    std::vector<EvalCase> cases;
    std::size_t id = 0;
    for (double w : unseenw_test_w_values()) {
        spin::ModelParams p;
        p.n_sites = 8;
        p.w_over_g = w;
        const auto axes =
            phase::AxisGrid::linear(cfg.dataset.r_ground, cfg.dataset.r_ground,
                                    cfg.dataset.t_min, cfg.dataset.t_max, cfg.dataset.mu_max);
        const phase::PhaseDiagram d = phase::generate(p, axes, threads);
        cases.push_back(build_eval_case(d, id, 4, cfg.dataset.r_input,
                                        rng::derive_seed(seed, detail::kEvalSalt + id),
                                        threads));
        ++id;
    }
    return run_cases(cases, {4}, "unseenw", &state);
}

// Large-system scenario: a single diagram beyond the trained system sizes.
inline ScenarioResult run_largen(const net::NetworkState& state, std::uint64_t seed,
                                 std::size_t threads = 1) {
    spin::ModelParams p;
    p.n_sites = 12;
    p.w_over_g = 1.0;
    const auto axes = phase::AxisGrid::linear(96, 96, 0.1, 2.5, 1.4);
    const phase::PhaseDiagram d = phase::generate(p, axes, threads);
    std::vector<EvalCase> cases = {
        build_eval_case(d, 0, 4, 24, rng::derive_seed(seed, detail::kEvalSalt), threads)};
    return run_cases(cases, {4}, "largen", &state);
}

// --- manifest and report serialization ------------------------------------

inline nlohmann::json to_json(const data::DatasetSpec& s) {
    return nlohmann::json{{"n_values", s.n_values},
                          {"w_over_g_values", s.w_over_g_values},
                          {"r_ground", s.r_ground},
                          {"r_input", s.r_input},
                          {"r_max", s.r_max},
                          {"split_fraction", s.split_fraction},
                          {"master_seed", s.master_seed},
                          {"t_min", s.t_min},
                          {"t_max", s.t_max},
                          {"mu_max", s.mu_max}};
}

inline data::DatasetSpec dataset_spec_from_json(const nlohmann::json& j) {
    data::DatasetSpec s;
    s.n_values = j.at("n_values").get<std::vector<std::size_t>>();
    s.w_over_g_values = j.at("w_over_g_values").get<std::vector<double>>();
    s.r_ground = j.at("r_ground").get<std::size_t>();
    s.r_input = j.at("r_input").get<std::size_t>();
    s.r_max = j.at("r_max").get<std::size_t>();
    s.split_fraction = j.at("split_fraction").get<double>();
    s.master_seed = j.at("master_seed").get<std::uint64_t>();
    s.t_min = j.at("t_min").get<double>();
    s.t_max = j.at("t_max").get<double>();
    s.mu_max = j.at("mu_max").get<double>();
    return s;
}

inline nlohmann::json to_json(const optim::TrainingConfig& c) {
    return nlohmann::json{{"epochs", c.epochs},
                          {"learning_rate", c.learning_rate},
                          {"milestones", c.milestones},
                          {"decay", c.decay},
                          {"batch_pairs", c.batch_pairs},
                          {"seed", c.seed},
                          {"threads", c.threads}};
}

inline nlohmann::json to_json(const net::NetworkConfig& c) {
    return nlohmann::json{{"in_channels", c.in_channels},
                          {"latent_channels", c.latent_channels},
                          {"n_res_blocks", c.n_res_blocks},
                          {"hidden_width", c.hidden_width},
                          {"n_hidden_layers", c.n_hidden_layers}};
}

struct ManifestEntry {
    std::size_t id = 0;
    std::string file;
    std::size_t n_sites = 0;
    double w_over_g = 0.0;
    std::string membership; // train | val
};

struct Manifest {
    data::DatasetSpec spec;
    std::vector<ManifestEntry> entries;
};

inline Manifest make_manifest(const DatasetBundle& b, const std::vector<std::string>& files) {
    if (files.size() != b.diagrams.size())
        throw invariant_error("manifest: one file per diagram required");
    Manifest m;
    m.spec = b.spec;
    for (std::size_t i = 0; i < b.diagrams.size(); ++i) {
        ManifestEntry e;
        e.id = i;
        e.file = files[i];
        e.n_sites = b.diagrams[i].params.n_sites;
        e.w_over_g = b.diagrams[i].params.w_over_g;
        const bool in_train = std::binary_search(b.split.train_ids.begin(),
                                                 b.split.train_ids.end(), i);
        e.membership = in_train ? "train" : "val";
        m.entries.push_back(e);
    }
    return m;
}

inline void write_manifest(const Manifest& m, const std::string& path) {
    nlohmann::json j;
    j["spec"] = to_json(m.spec);
    j["diagrams"] = nlohmann::json::array();
    for (const auto& e : m.entries)
        j["diagrams"].push_back({{"id", e.id},
                                 {"file", e.file},
                                 {"n", e.n_sites},
                                 {"w_over_g", e.w_over_g},
                                 {"split", e.membership}});
    std::ofstream os(path);
    if (!os) throw io_error("manifest: cannot open for writing: " + path);
    os << j.dump(2) << '\n';
    if (!os) throw io_error("manifest: write failed: " + path);
}

inline Manifest read_manifest(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw io_error("manifest: cannot open for reading: " + path);
    nlohmann::json j;
    try {
        is >> j;
        Manifest m;
        m.spec = dataset_spec_from_json(j.at("spec"));
        for (const auto& e : j.at("diagrams")) {
            ManifestEntry me;
            me.id = e.at("id").get<std::size_t>();
            me.file = e.at("file").get<std::string>();
            me.n_sites = e.at("n").get<std::size_t>();
            me.w_over_g = e.at("w_over_g").get<double>();
            me.membership = e.at("split").get<std::string>();
            if (me.membership != "train" && me.membership != "val")
                throw io_error("manifest: unknown split membership: " + me.membership);
            m.entries.push_back(me);
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw io_error(std::string("manifest: malformed document: ") + e.what());
    }
}

// Rebuild a bundle from a manifest whose PHD1 files live next to it.
inline DatasetBundle load_bundle(const Manifest& m, const std::string& dir) {
    DatasetBundle b;
    b.spec = m.spec;
    b.diagrams.resize(m.entries.size());
    for (const auto& e : m.entries) {
        if (e.id >= m.entries.size()) throw io_error("manifest: diagram id out of range");
        b.diagrams[e.id] = phd1::read(dir + "/" + e.file);
        if (e.membership == "train")
            b.split.train_ids.push_back(e.id);
        else
            b.split.val_ids.push_back(e.id);
    }
    std::sort(b.split.train_ids.begin(), b.split.train_ids.end());
    std::sort(b.split.val_ids.begin(), b.split.val_ids.end());
    return b;
}

inline nlohmann::json to_json(const metrics::ErrorReport& r) {
    return nlohmann::json{{"mask", r.mask_kind},
                          {"scenario", r.scenario},
                          {"mean", r.mean},
                          {"median", r.median},
                          {"q1", r.q1},
                          {"q3", r.q3},
                          {"max_after_trim", r.max_after_trim},
                          {"total_count", r.total_count},
                          {"trimmed_count", r.trimmed_count},
                          {"floored_count", r.floored_count}};
}

inline nlohmann::json to_json(const ScenarioResult& res) {
    nlohmann::json j;
    j["scenario"] = res.scenario;
    j["reports"] = nlohmann::json::array();
    for (const auto& r : res.reports)
        j["reports"].push_back({{"method", r.method},
                                {"ratio", r.ratio},
                                {"psnr_db", r.psnr_db},
                                {"whole", to_json(r.whole)},
                                {"transition", to_json(r.transition)}});
    return j;
}

inline void write_json(const nlohmann::json& j, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error("report: cannot open for writing: " + path);
    os << j.dump(2) << '\n';
    if (!os) throw io_error("report: write failed: " + path);
}

// Per-point relative-error map as CSV for external box plots.
inline void write_error_csv(const Matrix& errors, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw io_error("report: cannot open for writing: " + path);
    os << "t_index,mu_index,rel_err\n";
    char buf[80];
    for (std::size_t i = 0; i < errors.rows(); ++i)
        for (std::size_t j = 0; j < errors.cols(); ++j) {
            std::snprintf(buf, sizeof(buf), "%zu,%zu,%.17g\n", i, j, errors(i, j));
            os << buf;
        }
    if (!os) throw io_error("report: write failed: " + path);
}

} // namespace nniqs::pipeline

#endif
