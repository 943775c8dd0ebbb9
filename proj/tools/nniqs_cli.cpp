// Command-line front end: simulation, analytic reference, dataset builds,
// training, prediction, baselines and scenario evaluation. Every run writes
// a fully resolved config echo next to its outputs so it can be reproduced
// from the artifacts alone.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "nniqs/pipeline.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace nniqs;

namespace {

// Exit codes: 0 success, 1 usage, 2 invariant violation, 3 I/O failure,
// 4 numerical failure. Errors are a single machine-parsable stderr line.
constexpr int kExitUsage = 1;
constexpr int kExitInvariant = 2;
constexpr int kExitIo = 3;
constexpr int kExitNumeric = 4;

std::size_t default_threads() {
    const unsigned hc = std::thread::hardware_concurrency();
    return hc == 0 ? 1 : static_cast<std::size_t>(hc);
}

void ensure_out_dir(const std::string& out) {
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec) throw io_error("cannot create output directory: " + out + ": " + ec.message());
}

void write_config_echo(const std::string& out, const std::string& cmd, const json& j) {
    pipeline::write_json(j, out + "/" + cmd + "_config.json");
}

std::string diagram_file_name(std::size_t id) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "diagram_%03zu.phd1", id);
    return buf;
}

// Shared axis/system flags; each subcommand registers only what it consumes.
struct SimulateArgs {
    std::size_t n = 8;
    double w_over_g = 1.0;
    std::size_t grid = 48;
    double t_min = 0.1;
    double t_max = 2.5;
    double mu_max = 1.4;
    std::size_t threads = default_threads();
    std::string out = ".";
};

int run_simulate(const SimulateArgs& a) {
    ensure_out_dir(a.out);
    spin::ModelParams p;
    p.n_sites = a.n;
    p.w_over_g = a.w_over_g;
    const auto axes = phase::AxisGrid::linear(a.grid, a.grid, a.t_min, a.t_max, a.mu_max);
    const phase::PhaseDiagram d = phase::generate(p, axes, a.threads);
    char name[64];
    std::snprintf(name, sizeof(name), "phase_n%zu_w%.6g_g%zu.phd1", a.n, a.w_over_g, a.grid);
    const std::string path = a.out + "/" + name;
    phd1::write(d, path);
    write_config_echo(a.out, "simulate",
                      json{{"subcommand", "simulate"},
                           {"n", a.n},
                           {"w_over_g", a.w_over_g},
                           {"grid", a.grid},
                           {"t_min", a.t_min},
                           {"t_max", a.t_max},
                           {"mu_max", a.mu_max},
                           {"threads", a.threads},
                           {"out", a.out},
                           {"artifact", name}});
    std::printf("wrote %s\n", path.c_str());
    return 0;
}

struct TheoryArgs {
    std::size_t grid = 64;
    double t_min = 0.1;
    double t_max = 2.5;
    std::string out = ".";
};

int run_theory(const TheoryArgs& a) {
    if (a.grid < 2) throw invariant_error("theory: need at least two temperature points");
    ensure_out_dir(a.out);
    const std::string path = a.out + "/theory.csv";
    std::ofstream os(path);
    if (!os) throw io_error("theory: cannot open for writing: " + path);
    os << "t_over_g,condensate_over_g\n";
    char buf[80];
    for (std::size_t i = 0; i < a.grid; ++i) {
        const double t = a.t_min + (a.t_max - a.t_min) * static_cast<double>(i) /
                                       static_cast<double>(a.grid - 1);
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", t, analytic::analytic_condensate(t));
        os << buf;
    }
    if (!os) throw io_error("theory: write failed: " + path);
    write_config_echo(a.out, "theory",
                      json{{"subcommand", "theory"},
                           {"grid", a.grid},
                           {"t_min", a.t_min},
                           {"t_max", a.t_max},
                           {"out", a.out},
                           {"artifact", "theory.csv"}});
    std::printf("wrote %s\n", path.c_str());
    return 0;
}

struct DatasetArgs {
    data::DatasetSpec spec = pipeline::desk_config().dataset;
    std::size_t threads = default_threads();
    std::string out = ".";
};

int run_dataset(const DatasetArgs& a) {
    ensure_out_dir(a.out);
    const pipeline::DatasetBundle bundle = pipeline::build_dataset(a.spec, a.threads);
    std::vector<std::string> files;
    for (std::size_t i = 0; i < bundle.diagrams.size(); ++i) {
        files.push_back(diagram_file_name(i));
        phd1::write(bundle.diagrams[i], a.out + "/" + files.back());
    }
    pipeline::write_manifest(pipeline::make_manifest(bundle, files), a.out + "/manifest.json");
    json echo{{"subcommand", "dataset"},
              {"spec", pipeline::to_json(a.spec)},
              {"threads", a.threads},
              {"out", a.out},
              {"artifact", "manifest.json"},
              {"diagrams", bundle.diagrams.size()}};
    write_config_echo(a.out, "dataset", echo);
    std::printf("wrote %s (%zu diagrams)\n", (a.out + "/manifest.json").c_str(),
                bundle.diagrams.size());
    return 0;
}

struct TrainArgs {
    std::string root = ".";
    optim::TrainingConfig training = pipeline::desk_config().training;
    net::NetworkConfig network = net::NetworkConfig::standard();
    std::size_t n_pairs = pipeline::desk_config().n_train_pairs;
    std::size_t max_targets = pipeline::desk_config().max_targets_per_pair;
    std::vector<std::size_t> ratios = pipeline::desk_config().eval_ratios;
    bool no_milestones = false;
    std::uint64_t seed = 0;
    std::string out = ".";
};

int run_train(TrainArgs a) {
    ensure_out_dir(a.out);
    if (a.no_milestones) a.training.milestones.clear();
    a.training.seed = a.seed;
    const pipeline::Manifest manifest = pipeline::read_manifest(a.root + "/manifest.json");
    const pipeline::DatasetBundle bundle = pipeline::load_bundle(manifest, a.root);
    const auto train_pairs =
        pipeline::training_pairs(bundle, a.n_pairs, a.seed, a.max_targets);
    const auto val_pairs = pipeline::validation_pairs(bundle, a.ratios, a.seed);
    net::NetworkState state = net::make_network(a.network, a.seed);
    const auto history = optim::train(state, train_pairs, val_pairs, a.training);
    checkpoint::save(state, a.out + "/checkpoint.iqs1");
    optim::write_history_csv(history, a.out + "/history.csv");
    write_config_echo(a.out, "train",
                      json{{"subcommand", "train"},
                           {"root", a.root},
                           {"training", pipeline::to_json(a.training)},
                           {"network", pipeline::to_json(a.network)},
                           {"n_pairs", a.n_pairs},
                           {"max_targets", a.max_targets},
                           {"eval_ratios", a.ratios},
                           {"seed", a.seed},
                           {"out", a.out},
                           {"artifacts", {"checkpoint.iqs1", "history.csv"}}});
    if (history.empty())
        std::printf("wrote %s (0 epochs)\n", (a.out + "/checkpoint.iqs1").c_str());
    else
        std::printf("wrote %s (%zu epochs, final train L1 %.6g, val PSNR %.2f dB)\n",
                    (a.out + "/checkpoint.iqs1").c_str(), history.size(),
                    history.back().train_l1, history.back().val_psnr);
    return 0;
}

struct PredictArgs {
    std::string checkpoint;
    std::string input;
    std::size_t ratio = 2;
    std::string out = ".";
};

// Upscaled diagram on the same physical axis bounds as the input.
phase::PhaseDiagram upscaled_diagram(const phase::PhaseDiagram& in, Matrix values_model) {
    phase::PhaseDiagram out;
    out.params = in.params;
    out.axes = phase::AxisGrid::linear(values_model.rows(), values_model.cols(),
                                       in.axes.t_values.front(), in.axes.t_values.back(),
                                       in.axes.mu_values.back());
    out.values = data::from_model_space(values_model);
    return out;
}

int run_predict(const PredictArgs& a) {
    if (a.ratio < 1) throw invariant_error("predict: ratio must be positive");
    ensure_out_dir(a.out);
    const net::NetworkState state = checkpoint::load(a.checkpoint);
    const phase::PhaseDiagram in = phd1::read(a.input);
    if (in.values.rows() != in.values.cols())
        throw invariant_error("predict: input grid must be square");
    const data::Grid3 packed = data::pack(data::to_model_space(in.values));
    const Matrix pred = pipeline::net_upscale(state, packed, in.values.rows() * a.ratio);
    const std::string path = a.out + "/prediction.phd1";
    phd1::write(upscaled_diagram(in, pred), path);
    write_config_echo(a.out, "predict",
                      json{{"subcommand", "predict"},
                           {"checkpoint", a.checkpoint},
                           {"input", a.input},
                           {"ratio", a.ratio},
                           {"out", a.out},
                           {"artifact", "prediction.phd1"}});
    std::printf("wrote %s\n", path.c_str());
    return 0;
}

struct BaselineArgs {
    std::string input;
    std::string method = "bilinear";
    std::string checkpoint; // only consulted for --method nniqs
    std::size_t ratio = 2;
    std::string out = ".";
};

int run_baseline(const BaselineArgs& a) {
    if (a.ratio < 1) throw invariant_error("baseline: ratio must be positive");
    ensure_out_dir(a.out);
    const phase::PhaseDiagram in = phd1::read(a.input);
    if (in.values.rows() != in.values.cols())
        throw invariant_error("baseline: input grid must be square");
    const Matrix input_model = data::to_model_space(in.values);
    const std::size_t target = in.values.rows() * a.ratio;
    Matrix pred;
    if (a.method == "nniqs") {
        if (a.checkpoint.empty())
            throw invariant_error("baseline: --method nniqs requires --checkpoint");
        const net::NetworkState state = checkpoint::load(a.checkpoint);
        pred = pipeline::net_upscale(state, data::pack(input_model), target);
    } else {
        pred = pipeline::baseline_upscale(input_model, interp::parse_method(a.method), target);
    }
    const std::string name = "baseline_" + a.method + ".phd1";
    const std::string path = a.out + "/" + name;
    phd1::write(upscaled_diagram(in, pred), path);
    write_config_echo(a.out, "baseline",
                      json{{"subcommand", "baseline"},
                           {"input", a.input},
                           {"method", a.method},
                           {"checkpoint", a.checkpoint},
                           {"ratio", a.ratio},
                           {"out", a.out},
                           {"artifact", name}});
    std::printf("wrote %s\n", path.c_str());
    return 0;
}

struct EvaluateArgs {
    std::string pred;
    std::string truth;
    std::string scenario; // empty = plain pred-vs-truth report
    std::string root = ".";
    std::string checkpoint;
    std::uint64_t seed = 0;
    std::size_t threads = default_threads();
    std::string out = ".";
};

int run_evaluate_files(const EvaluateArgs& a) {
    if (a.pred.empty() || a.truth.empty())
        throw invariant_error("evaluate: need PRED and TRUTH files (or --scenario)");
    ensure_out_dir(a.out);
    const phase::PhaseDiagram pred = phd1::read(a.pred);
    const phase::PhaseDiagram truth = phd1::read(a.truth);
    const Matrix pred_model = data::to_model_space(pred.values);
    const Matrix truth_model = data::to_model_space(truth.values);
    const metrics::RelativeErrorMap errs = metrics::relative_error_map(pred_model, truth_model);
    const auto mask = phase::transition_mask(phase::minmax_normalize(truth.values));
    metrics::ErrorReport whole = metrics::region_stats(errs.errors);
    whole.scenario = "files";
    whole.floored_count = errs.floored;
    metrics::ErrorReport transition = metrics::region_stats(errs.errors, mask.cells, "transition");
    transition.scenario = "files";
    json report{{"subcommand", "evaluate"},
                {"pred", a.pred},
                {"truth", a.truth},
                {"psnr_db", metrics::psnr(pred_model, truth_model)},
                {"whole", pipeline::to_json(whole)},
                {"transition", pipeline::to_json(transition)}};
    pipeline::write_json(report, a.out + "/evaluate_report.json");
    pipeline::write_error_csv(errs.errors, a.out + "/evaluate_errors.csv");
    write_config_echo(a.out, "evaluate",
                      json{{"subcommand", "evaluate"},
                           {"pred", a.pred},
                           {"truth", a.truth},
                           {"out", a.out},
                           {"artifacts", {"evaluate_report.json", "evaluate_errors.csv"}}});
    std::printf("wrote %s\n", (a.out + "/evaluate_report.json").c_str());
    return 0;
}

int run_evaluate_scenario(const EvaluateArgs& a) {
    if (a.checkpoint.empty())
        throw invariant_error("evaluate: --scenario requires --checkpoint");
    ensure_out_dir(a.out);
    const net::NetworkState state = checkpoint::load(a.checkpoint);
    pipeline::ScenarioResult result;
    if (a.scenario == "basic") {
        const pipeline::Manifest manifest = pipeline::read_manifest(a.root + "/manifest.json");
        const pipeline::DatasetBundle bundle = pipeline::load_bundle(manifest, a.root);
        result = pipeline::run_basic(state, bundle, pipeline::desk_config().eval_ratios,
                                     a.seed, a.threads);
    } else if (a.scenario == "beyond") {
        result = pipeline::run_beyond(state, pipeline::BeyondSpec{}, a.seed, a.threads);
    } else if (a.scenario == "unseenw") {
        result = pipeline::run_unseenw(state, a.seed, a.threads);
    } else if (a.scenario == "largen") {
        result = pipeline::run_largen(state, a.seed, a.threads);
    } else {
        throw invariant_error("evaluate: unknown scenario: " + a.scenario);
    }
    const std::string name = "scenario_" + a.scenario + ".json";
    pipeline::write_json(pipeline::to_json(result), a.out + "/" + name);
    write_config_echo(a.out, "evaluate",
                      json{{"subcommand", "evaluate"},
                           {"scenario", a.scenario},
                           {"root", a.root},
                           {"checkpoint", a.checkpoint},
                           {"seed", a.seed},
                           {"threads", a.threads},
                           {"out", a.out},
                           {"artifact", name}});
    std::printf("wrote %s\n", (a.out + "/" + name).c_str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"nniqs: Schwinger-model phase diagrams and neural up-scaling"};
    app.require_subcommand(1);

    SimulateArgs sim;
    auto* c_sim = app.add_subcommand("simulate", "generate one phase diagram as PHD1");
    c_sim->add_option("--n", sim.n, "number of lattice sites")->envname("NNIQS_N");
    c_sim->add_option("--w-over-g", sim.w_over_g, "hopping over coupling")
        ->envname("NNIQS_W_OVER_G");
    c_sim->add_option("--grid", sim.grid, "grid resolution per axis")->envname("NNIQS_GRID");
    c_sim->add_option("--t-min", sim.t_min, "minimum T/g")->envname("NNIQS_T_MIN");
    c_sim->add_option("--t-max", sim.t_max, "maximum T/g")->envname("NNIQS_T_MAX");
    c_sim->add_option("--mu-max", sim.mu_max, "maximum mu/g")->envname("NNIQS_MU_MAX");
    c_sim->add_option("--threads", sim.threads, "worker threads")->envname("NNIQS_THREADS");
    c_sim->add_option("--out", sim.out, "output directory")->envname("NNIQS_OUT");

    TheoryArgs th;
    auto* c_th = app.add_subcommand("theory", "analytic condensate curve as CSV");
    c_th->add_option("--grid", th.grid, "number of temperature samples")->envname("NNIQS_GRID");
    c_th->add_option("--t-min", th.t_min, "minimum T/g")->envname("NNIQS_T_MIN");
    c_th->add_option("--t-max", th.t_max, "maximum T/g")->envname("NNIQS_T_MAX");
    c_th->add_option("--out", th.out, "output directory")->envname("NNIQS_OUT");

    DatasetArgs ds;
    auto* c_ds = app.add_subcommand("dataset", "generate a training dataset with manifest");
    c_ds->add_option("--n", ds.spec.n_values, "system sizes")->envname("NNIQS_N");
    c_ds->add_option("--w-over-g", ds.spec.w_over_g_values, "coupling values")
        ->envname("NNIQS_W_OVER_G");
    c_ds->add_option("--grid", ds.spec.r_ground, "ground-truth resolution")
        ->envname("NNIQS_GRID");
    c_ds->add_option("--r-input", ds.spec.r_input, "training input resolution");
    c_ds->add_option("--r-max", ds.spec.r_max, "maximum training ratio");
    c_ds->add_option("--split-fraction", ds.spec.split_fraction, "train fraction");
    c_ds->add_option("--t-min", ds.spec.t_min, "minimum T/g")->envname("NNIQS_T_MIN");
    c_ds->add_option("--t-max", ds.spec.t_max, "maximum T/g")->envname("NNIQS_T_MAX");
    c_ds->add_option("--mu-max", ds.spec.mu_max, "maximum mu/g")->envname("NNIQS_MU_MAX");
    c_ds->add_option("--seed", ds.spec.master_seed, "master seed")->envname("NNIQS_SEED");
    c_ds->add_option("--threads", ds.threads, "worker threads")->envname("NNIQS_THREADS");
    c_ds->add_option("--out", ds.out, "output directory")->envname("NNIQS_OUT");

    TrainArgs tr;
    auto* c_tr = app.add_subcommand("train", "train the network on a dataset directory");
    c_tr->add_option("--root", tr.root, "dataset directory containing manifest.json");
    c_tr->add_option("--epochs", tr.training.epochs, "training epochs");
    c_tr->add_option("--learning-rate,--lr", tr.training.learning_rate, "Adam learning rate");
    c_tr->add_option("--batch-pairs", tr.training.batch_pairs, "pairs per batch");
    c_tr->add_option("--milestones", tr.training.milestones, "decay epochs");
    c_tr->add_flag("--no-milestones", tr.no_milestones, "clear the decay schedule");
    c_tr->add_option("--decay", tr.training.decay, "milestone decay factor");
    c_tr->add_option("--threads", tr.training.threads, "worker threads")
        ->envname("NNIQS_THREADS");
    c_tr->add_option("--pairs", tr.n_pairs, "number of training pairs");
    c_tr->add_option("--max-targets", tr.max_targets,
                     "random target budget per pair (0 = all crop points)");
    c_tr->add_option("--ratio", tr.ratios, "validation upscale ratios")->envname("NNIQS_RATIO");
    c_tr->add_option("--latent-channels", tr.network.latent_channels, "encoder latent depth");
    c_tr->add_option("--res-blocks", tr.network.n_res_blocks, "encoder residual blocks");
    c_tr->add_option("--hidden-width", tr.network.hidden_width, "decoder hidden width");
    c_tr->add_option("--hidden-layers", tr.network.n_hidden_layers, "decoder hidden layers");
    c_tr->add_option("--seed", tr.seed, "seed for init, pairs and shuffling")
        ->envname("NNIQS_SEED");
    c_tr->add_option("--out", tr.out, "output directory")->envname("NNIQS_OUT");

    PredictArgs pr;
    auto* c_pr = app.add_subcommand("predict", "up-scale a PHD1 with a trained checkpoint");
    c_pr->add_option("checkpoint", pr.checkpoint, "IQS1 checkpoint")->required();
    c_pr->add_option("input", pr.input, "input PHD1")->required();
    c_pr->add_option("--ratio", pr.ratio, "upscale ratio")->envname("NNIQS_RATIO");
    c_pr->add_option("--out", pr.out, "output directory")->envname("NNIQS_OUT");

    BaselineArgs bl;
    auto* c_bl = app.add_subcommand("baseline", "up-scale a PHD1 with a classical method");
    c_bl->add_option("input", bl.input, "input PHD1")->required();
    c_bl->add_option("--method", bl.method, "bilinear|axiscubic|bicubic|nniqs")
        ->envname("NNIQS_METHOD");
    c_bl->add_option("--checkpoint", bl.checkpoint, "IQS1 checkpoint (nniqs method)");
    c_bl->add_option("--ratio", bl.ratio, "upscale ratio")->envname("NNIQS_RATIO");
    c_bl->add_option("--out", bl.out, "output directory")->envname("NNIQS_OUT");

    EvaluateArgs ev;
    auto* c_ev = app.add_subcommand("evaluate", "error reports for files or a scenario");
    c_ev->add_option("pred", ev.pred, "predicted PHD1");
    c_ev->add_option("truth", ev.truth, "ground-truth PHD1");
    c_ev->add_option("--scenario", ev.scenario, "basic|beyond|unseenw|largen")
        ->envname("NNIQS_SCENARIO");
    c_ev->add_option("--root", ev.root, "dataset directory (basic scenario)");
    c_ev->add_option("--checkpoint", ev.checkpoint, "IQS1 checkpoint (scenario mode)");
    c_ev->add_option("--seed", ev.seed, "evaluation seed")->envname("NNIQS_SEED");
    c_ev->add_option("--threads", ev.threads, "worker threads")->envname("NNIQS_THREADS");
    c_ev->add_option("--out", ev.out, "output directory")->envname("NNIQS_OUT");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::fprintf(stderr, "error: usage: %s\n", e.what());
        return kExitUsage;
    }

    try {
        if (c_sim->parsed()) return run_simulate(sim);
        if (c_th->parsed()) return run_theory(th);
        if (c_ds->parsed()) return run_dataset(ds);
        if (c_tr->parsed()) return run_train(tr);
        if (c_pr->parsed()) return run_predict(pr);
        if (c_bl->parsed()) return run_baseline(bl);
        if (c_ev->parsed())
            return ev.scenario.empty() ? run_evaluate_files(ev) : run_evaluate_scenario(ev);
    } catch (const invariant_error& e) {
        std::fprintf(stderr, "error: invariant: %s\n", e.what());
        return kExitInvariant;
    } catch (const io_error& e) {
        std::fprintf(stderr, "error: io: %s\n", e.what());
        return kExitIo;
    } catch (const numeric_error& e) {
        std::fprintf(stderr, "error: numeric: %s\n", e.what());
        return kExitNumeric;
    }
    std::fprintf(stderr, "error: usage: no subcommand selected\n");
    return kExitUsage;
}
