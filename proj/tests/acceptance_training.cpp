// Training acceptance gate: criteria 6, 7 and 8 share one full desk-scale
// run (dataset build, 200 training epochs, scenario evaluations), so this
// binary trains once and grades all three. One line per criterion; exit code
// is the number of failed criteria.
#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <string>
#include <vector>

#include "nniqs/pipeline.hpp"

using namespace nniqs;
using clk = std::chrono::steady_clock;

namespace {

int failures = 0;

void report(int id, bool pass, const std::string& detail) {
    std::printf("criterion %d: %s - %s\n", id, pass ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof(buf), f, ap);
    va_end(ap);
    return buf;
}

double elapsed(clk::time_point t0) {
    return std::chrono::duration<double>(clk::now() - t0).count();
}

const pipeline::MethodReport& find_report(const pipeline::ScenarioResult& res,
                                          const std::string& method, std::size_t ratio) {
    for (const auto& r : res.reports)
        if (r.method == method && r.ratio == ratio) return r;
    throw invariant_error("acceptance: missing report for " + method);
}

} // namespace

int main() {
    const auto cfg = pipeline::desk_config();
    const std::size_t threads = cfg.training.threads;

    std::printf("desk run: %zu diagrams expected, %zu pairs, %zu epochs\n",
                cfg.dataset.n_values.size() * cfg.dataset.w_over_g_values.size(),
                cfg.n_train_pairs, cfg.training.epochs);
    std::fflush(stdout);

    const auto t0 = clk::now();
    const auto bundle = pipeline::build_dataset(cfg.dataset, threads);
    const auto train_pairs = pipeline::training_pairs(bundle, cfg.n_train_pairs,
                                                      cfg.training.seed,
                                                      cfg.max_targets_per_pair);
    const auto val_pairs =
        pipeline::validation_pairs(bundle, cfg.eval_ratios, cfg.training.seed);
    net::NetworkState state = net::make_network(cfg.network, cfg.training.seed);
    std::printf("setup done in %.1f s\n", elapsed(t0));
    std::fflush(stdout);

    const auto t_train = clk::now();
    const auto history = optim::train(state, train_pairs, val_pairs, cfg.training);
    const double train_secs = elapsed(t_train);
    for (std::size_t i = 0; i < history.size(); i += 10) {
        const auto& r = history[i];
        std::printf("  epoch %3zu: train %.6f val %.6f psnr %.2f\n", r.epoch, r.train_l1,
                    r.val_l1, r.val_psnr);
    }
    std::printf("trained %zu epochs in %.0f s\n", history.size(), train_secs);
    std::fflush(stdout);

    const auto basic = pipeline::run_basic(state, bundle, cfg.eval_ratios,
                                           cfg.training.seed, threads);
    for (const auto& r : basic.reports)
        std::printf("  basic %-9s x%zu  psnr %6.2f dB  transition trimmed mean %.5f\n",
                    r.method.c_str(), r.ratio, r.psnr_db, r.transition.mean);
    std::fflush(stdout);

    // --- criterion 6: loss reduction and PSNR superiority at trained ratios
    {
        const double initial = history.front().train_l1;
        const double final_l1 = history.back().train_l1;
        bool psnr_ok = true;
        std::string per_ratio;
        for (std::size_t r : cfg.eval_ratios) {
            const auto& n = find_report(basic, "nniqs", r);
            const auto& b = find_report(basic, "bilinear", r);
            if (!(n.psnr_db > b.psnr_db)) psnr_ok = false;
            per_ratio += fmt(" x%zu %.2f/%.2f", r, n.psnr_db, b.psnr_db);
        }
        const bool loss_ok = final_l1 <= 0.1 * initial;
        const bool time_ok = train_secs < 2.2 * 3600.0;
        report(6, loss_ok && psnr_ok && time_ok,
               fmt("train L1 %.3g -> %.3g (ratio %.3f, need <= 0.1), net/bilinear dB:%s, "
                   "%.0f s",
                   initial, final_l1, final_l1 / initial, per_ratio.c_str(), train_secs));
    }

    // --- criterion 7: transition-region superiority at x3 and x4
    {
        bool pass = true;
        std::string detail;
        for (std::size_t r : {std::size_t{3}, std::size_t{4}}) {
            const auto& n = find_report(basic, "nniqs", r);
            const auto& b = find_report(basic, "bilinear", r);
            if (!(n.transition.mean < b.transition.mean)) pass = false;
            detail += fmt(" x%zu ratio %.2f (%.5f vs %.5f)", r,
                          b.transition.mean / n.transition.mean, n.transition.mean,
                          b.transition.mean);
        }
        report(7, pass, "transition trimmed mean, bilinear/nniqs:" + detail);
    }

    // --- criterion 8: beyond-ratio generalization on the held-out fine grid
    {
        const auto beyond = pipeline::run_beyond(state, pipeline::BeyondSpec{},
                                                 cfg.training.seed, threads);
        const auto& x4 = find_report(beyond, "nniqs", 4);
        const auto& x6 = find_report(beyond, "nniqs", 6);
        const bool pass = x6.whole.mean <= 2.0 * x4.whole.mean;
        report(8, pass,
               fmt("whole-diagram trimmed mean at x6 %.5f vs own x4 %.5f (ratio %.2f, "
                   "need <= 2)",
                   x6.whole.mean, x4.whole.mean, x6.whole.mean / x4.whole.mean));
    }

    return failures;
}
