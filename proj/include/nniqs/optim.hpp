// Training loop: seeded shuffle, mini-batches of pairs, mean absolute error,
// adaptive first/second-moment updates with a milestone step-size schedule.
// Batch gradients are reduced in pair order, so results do not depend on the
// thread count.
#ifndef NNIQS_OPTIM_HPP
#define NNIQS_OPTIM_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "nniqs/core.hpp"
#include "nniqs/dataset.hpp"
#include "nniqs/metrics.hpp"
#include "nniqs/net.hpp"

namespace nniqs::optim {

struct TrainingConfig {
    std::size_t epochs = 1000;
    double learning_rate = 1e-5;
    std::vector<std::size_t> milestones = {200, 400, 600, 800};
    double decay = 0.5;
    std::size_t batch_pairs = 16;
    std::uint64_t seed = 0;
    std::size_t threads = 1;

    void validate() const {
        if (!(learning_rate > 0.0) || !std::isfinite(learning_rate))
            throw invariant_error("TrainingConfig: learning rate must be positive and finite");
        if (!(decay > 0.0 && decay <= 1.0))
            throw invariant_error("TrainingConfig: decay must lie in (0, 1]");
        if (batch_pairs == 0) throw invariant_error("TrainingConfig: batch size must be positive");
        if (threads == 0) throw invariant_error("TrainingConfig: thread count must be positive");
        for (std::size_t i = 1; i < milestones.size(); ++i)
            if (milestones[i] <= milestones[i - 1])
                throw invariant_error("TrainingConfig: milestones must be strictly increasing");
        // with epochs == 0 the schedule never fires, so the bound is vacuous
        if (epochs > 0 && !milestones.empty() && milestones.back() >= epochs)
            throw invariant_error("TrainingConfig: milestones must be smaller than epochs");
    }
};

// --- adaptive gradient step ----------------------------------------------

struct AdamMoments {
    std::vector<double> m;
    std::vector<double> v;
    std::uint64_t t = 0;
};

inline void adam_step(net::ParamSet& params, const net::ParamSet& grads, AdamMoments& mom,
                      double lr) {
    constexpr double beta1 = 0.9;
    constexpr double beta2 = 0.999;
    constexpr double eps = 1e-8;
    const std::size_t n = net::param_count(params);
    if (mom.m.empty()) {
        mom.m.assign(n, 0.0);
        mom.v.assign(n, 0.0);
    }
    if (mom.m.size() != n) throw invariant_error("adam_step: moment size mismatch");
    ++mom.t;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(mom.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(mom.t));
    std::size_t cursor = 0;
    net::visit_params2(params, grads,
                       [&](double* p, const double* g, std::size_t len) {
                           double* mm = mom.m.data() + cursor;
                           double* vv = mom.v.data() + cursor;
                           for (std::size_t i = 0; i < len; ++i) {
                               mm[i] = beta1 * mm[i] + (1.0 - beta1) * g[i];
                               vv[i] = beta2 * vv[i] + (1.0 - beta2) * g[i] * g[i];
                               const double mhat = mm[i] / bc1;
                               const double vhat = vv[i] / bc2;
                               p[i] -= lr * mhat / (std::sqrt(vhat) + eps);
                           }
                           cursor += len;
                       });
}

// --- training loop -------------------------------------------------------

struct EpochRecord {
    std::size_t epoch = 0; // 1-based
    double train_l1 = 0.0;
    double val_l1 = 0.0;
    double val_psnr = 0.0;
};

namespace detail {

// shuffle streams must not collide with dataset pair streams sharing a seed
inline constexpr std::uint64_t kShuffleSalt = 0x73687566666c6500ull;

inline void validate_pairs(const std::vector<data::Sample>& pairs, const char* which) {
    if (pairs.empty())
        throw invariant_error(std::string("train: empty ") + which + " set");
}

} // namespace detail

inline std::vector<EpochRecord> train(net::NetworkState& state,
                                      const std::vector<data::Sample>& train_pairs,
                                      const std::vector<data::Sample>& val_pairs,
                                      const TrainingConfig& cfg) {
    cfg.validate();
    detail::validate_pairs(train_pairs, "training");
    detail::validate_pairs(val_pairs, "validation");

    std::vector<EpochRecord> history;
    if (cfg.epochs == 0) return history;

    double lr = cfg.learning_rate;
    AdamMoments moments;
    net::ParamSet grad = net::make_params(state.config);
    const std::size_t max_batch = std::min(cfg.batch_pairs, train_pairs.size());
    std::vector<net::ParamSet> slots;
    slots.reserve(max_batch);
    for (std::size_t i = 0; i < max_batch; ++i) slots.push_back(net::make_params(state.config));
    std::vector<double> slot_loss(max_batch, 0.0);

    std::vector<std::size_t> order(train_pairs.size());
    std::vector<double> val_l1(val_pairs.size()), val_psnr(val_pairs.size());

    for (std::size_t e = 0; e < cfg.epochs; ++e) {
        const std::size_t epoch1 = e + 1;
        if (std::find(cfg.milestones.begin(), cfg.milestones.end(), epoch1) !=
            cfg.milestones.end())
            lr *= cfg.decay;

        std::iota(order.begin(), order.end(), std::size_t{0});
        rng::Stream shuffler(rng::derive_seed(cfg.seed, detail::kShuffleSalt + e));
        shuffler.shuffle(order);

        double epoch_loss = 0.0;
        for (std::size_t base = 0; base < order.size(); base += cfg.batch_pairs) {
            const std::size_t bsz = std::min(cfg.batch_pairs, order.size() - base);
            const double scale = 1.0 / static_cast<double>(bsz);
            parallel_for(bsz, cfg.threads, [&](std::size_t i) {
                net::zero_params(slots[i]);
                slot_loss[i] =
                    net::pair_grad(state, train_pairs[order[base + i]], slots[i], scale);
            });
            net::zero_params(grad);
            double batch_loss = 0.0;
            for (std::size_t i = 0; i < bsz; ++i) {
                net::axpy_params(grad, slots[i]);
                batch_loss += slot_loss[i];
                epoch_loss += slot_loss[i];
            }
            if (!std::isfinite(batch_loss))
                throw numeric_error("train: non-finite loss at epoch " +
                                    std::to_string(epoch1) + ", batch offset " +
                                    std::to_string(base));
            adam_step(state.params, grad, moments, lr);
            ++state.step;
            if (!net::params_finite(state.params))
                throw numeric_error("train: non-finite parameter after step at epoch " +
                                    std::to_string(epoch1));
        }

        parallel_for(val_pairs.size(), cfg.threads, [&](std::size_t i) {
            const Matrix pred = net::predict_sample(state, val_pairs[i]);
            const Matrix truth = net::sample_truth(val_pairs[i]);
            double acc = 0.0;
            for (std::size_t k = 0; k < pred.size(); ++k)
                acc += std::fabs(pred[k] - truth[k]);
            val_l1[i] = acc / static_cast<double>(pred.size());
            val_psnr[i] = metrics::psnr(pred, truth);
        });

        EpochRecord rec;
        rec.epoch = epoch1;
        rec.train_l1 = epoch_loss / static_cast<double>(train_pairs.size());
        rec.val_l1 =
            std::accumulate(val_l1.begin(), val_l1.end(), 0.0) / static_cast<double>(val_l1.size());
        rec.val_psnr = std::accumulate(val_psnr.begin(), val_psnr.end(), 0.0) /
                       static_cast<double>(val_psnr.size());
        if (!std::isfinite(rec.val_l1))
            throw numeric_error("train: non-finite validation loss at epoch " +
                                std::to_string(epoch1));
        history.push_back(rec);
    }
    return history;
}

inline void write_history_csv(const std::vector<EpochRecord>& history, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw io_error("history: cannot open " + path + " for writing");
    out << "epoch,train_l1,val_l1,val_psnr\n";
    char buf[128];
    for (const auto& r : history) {
        std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g\n", r.epoch, r.train_l1,
                      r.val_l1, r.val_psnr);
        out << buf;
    }
    if (!out) throw io_error("history: write failed for " + path);
}

} // namespace nniqs::optim

#endif
