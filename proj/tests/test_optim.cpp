// Training loop: config validation, the adaptive step against hand-computed
// values, milestone decay, determinism across runs and thread counts, and
// history serialization.
#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "nniqs/optim.hpp"
#include "temp_dir.hpp"

using namespace nniqs;

namespace {

// Full-grid sample on a smooth synthetic field, usable for both training and
// validation (validation needs every target of the output grid).
data::Sample make_full_sample(std::size_t side_in, std::size_t ratio, std::uint64_t seed) {
    rng::Stream stream(seed);
    const double a = stream.uniform_real(0.2, 0.8);
    const double b = stream.uniform_real(0.05, 0.15);
    const auto field = [&](double t, double mu) {
        return 0.5 + 0.25 * std::sin(2.1 * t + a) * std::cos(1.7 * mu) + b * t * mu;
    };

    data::Sample s;
    const auto in_chart = data::chart(side_in);
    Matrix in_vals(side_in, side_in);
    for (std::size_t i = 0; i < side_in; ++i)
        for (std::size_t j = 0; j < side_in; ++j)
            in_vals(i, j) = field(in_chart[i], in_chart[j]);
    s.input = data::pack(in_vals);
    s.in_t_coords = in_chart;
    s.in_mu_coords = in_chart;

    const std::size_t m = side_in * ratio;
    const auto out_chart = data::chart(m);
    const double cell = data::chart_cell(m);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j)
            s.targets.push_back(data::Target{out_chart[i], out_chart[j], cell, cell,
                                             field(out_chart[i], out_chart[j])});
    s.ratio = ratio;
    return s;
}

std::vector<data::Sample> make_sample_set(std::size_t count, std::uint64_t seed0) {
    std::vector<data::Sample> out;
    for (std::size_t k = 0; k < count; ++k) out.push_back(make_full_sample(4, 2, seed0 + k));
    return out;
}

bool params_equal(const net::ParamSet& a, const net::ParamSet& b) {
    net::ParamSet ca = a;
    net::ParamSet cb = b;
    bool same = true;
    net::visit_params2(ca, cb, [&](double* pa, const double* pb, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i)
            if (pa[i] != pb[i]) same = false;
    });
    return same;
}

} // namespace

TEST_CASE("training config validation", "[optim]") {
    optim::TrainingConfig good;
    good.epochs = 10;
    good.milestones = {3, 7};
    REQUIRE_NOTHROW(good.validate());

    auto expect_throw = [&](auto mutate) {
        optim::TrainingConfig c = good;
        mutate(c);
        REQUIRE_THROWS_AS(c.validate(), invariant_error);
    };
    expect_throw([](auto& c) { c.learning_rate = 0.0; });
    expect_throw([](auto& c) { c.learning_rate = -1e-3; });
    expect_throw([](auto& c) { c.learning_rate = std::nan(""); });
    expect_throw([](auto& c) { c.decay = 0.0; });
    expect_throw([](auto& c) { c.decay = 1.5; });
    expect_throw([](auto& c) { c.batch_pairs = 0; });
    expect_throw([](auto& c) { c.threads = 0; });
    expect_throw([](auto& c) { c.milestones = {3, 3}; });
    expect_throw([](auto& c) { c.milestones = {7, 3}; });
    expect_throw([](auto& c) { c.milestones = {3, 10}; }); // == epochs

    optim::TrainingConfig edge = good;
    edge.decay = 1.0; // allowed: schedule fires but does nothing
    REQUIRE_NOTHROW(edge.validate());

    // with epochs == 0 the milestone bound is vacuous
    optim::TrainingConfig zero = good;
    zero.epochs = 0;
    zero.milestones = {5, 9};
    REQUIRE_NOTHROW(zero.validate());
}

TEST_CASE("adam step matches hand-computed update", "[optim]") {
    const net::NetworkConfig mini = net::NetworkConfig::mini();
    net::NetworkState state = net::make_network(mini, 11);
    net::ParamSet params = state.params;
    const net::ParamSet before = params;

    net::ParamSet grads = net::make_params(mini);
    const double g = 2.0;
    net::visit_params(grads, [&](double* p, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) p[i] = g;
    });

    optim::AdamMoments mom;
    const double lr = 0.01;
    optim::adam_step(params, grads, mom, lr);
    REQUIRE(mom.t == 1);
    REQUIRE(mom.m.size() == net::param_count(params));

    // after one step the bias corrections cancel the moment scaling exactly:
    // mhat = g, vhat = g^2, so every parameter moves by lr*g/(|g| + eps)
    const double step = lr * g / (std::sqrt(g * g) + 1e-8);
    {
        net::ParamSet got = params;
        net::ParamSet was = before;
        double worst = 0.0;
        net::visit_params2(got, was, [&](double* pn, const double* po, std::size_t len) {
            for (std::size_t i = 0; i < len; ++i)
                worst = std::max(worst, std::fabs(pn[i] - (po[i] - step)));
        });
        REQUIRE(worst < 1e-15);
    }

    // second step with the same gradient, hand-rolled recurrences
    optim::adam_step(params, grads, mom, lr);
    REQUIRE(mom.t == 2);
    const double m2 = 0.9 * (0.1 * g) + 0.1 * g;
    const double v2 = 0.999 * (0.001 * g * g) + 0.001 * g * g;
    const double mhat = m2 / (1.0 - 0.9 * 0.9);
    const double vhat = v2 / (1.0 - 0.999 * 0.999);
    const double step2 = lr * mhat / (std::sqrt(vhat) + 1e-8);
    {
        net::ParamSet got = params;
        net::ParamSet was = before;
        double worst = 0.0;
        net::visit_params2(got, was, [&](double* pn, const double* po, std::size_t len) {
            for (std::size_t i = 0; i < len; ++i)
                worst = std::max(worst, std::fabs(pn[i] - (po[i] - step - step2)));
        });
        REQUIRE(worst < 1e-12);
    }

    // moments sized for a different parameter count are rejected
    mom.m.push_back(0.0);
    REQUIRE_THROWS_AS(optim::adam_step(params, grads, mom, lr), invariant_error);
}

TEST_CASE("train rejects empty pair sets and epochs zero is a no-op", "[optim]") {
    const auto pairs = make_sample_set(3, 500);
    const auto val = make_sample_set(2, 600);
    net::NetworkState state = net::make_network(net::NetworkConfig::mini(), 3);

    optim::TrainingConfig cfg;
    cfg.epochs = 1;
    cfg.learning_rate = 1e-3;
    cfg.milestones = {};
    cfg.batch_pairs = 2;
    REQUIRE_THROWS_AS(optim::train(state, {}, val, cfg), invariant_error);
    REQUIRE_THROWS_AS(optim::train(state, pairs, {}, cfg), invariant_error);

    const net::NetworkState fresh = state;
    cfg.epochs = 0;
    const auto history = optim::train(state, pairs, val, cfg);
    REQUIRE(history.empty());
    REQUIRE(state.step == fresh.step);
    REQUIRE(params_equal(state.params, fresh.params));
}

TEST_CASE("train reduces the loss and counts steps", "[optim]") {
    const auto pairs = make_sample_set(4, 700);
    const auto val = make_sample_set(2, 800);
    net::NetworkState state = net::make_network(net::NetworkConfig::mini(), 5);

    optim::TrainingConfig cfg;
    cfg.epochs = 30;
    cfg.learning_rate = 3e-3;
    cfg.milestones = {};
    cfg.batch_pairs = 2;
    cfg.seed = 9;
    const auto history = optim::train(state, pairs, val, cfg);
    REQUIRE(history.size() == 30);
    for (std::size_t i = 0; i < history.size(); ++i) {
        REQUIRE(history[i].epoch == i + 1);
        REQUIRE(std::isfinite(history[i].train_l1));
    }
    REQUIRE(history.back().train_l1 < history.front().train_l1);
    // 4 pairs in batches of 2 -> 2 steps per epoch
    REQUIRE(state.step == 30 * 2);
}

TEST_CASE("milestone decay changes the trajectory only after it fires", "[optim]") {
    const auto pairs = make_sample_set(4, 900);
    const auto val = make_sample_set(2, 1000);

    optim::TrainingConfig plain;
    plain.epochs = 4;
    plain.learning_rate = 2e-3;
    plain.milestones = {};
    plain.batch_pairs = 2;
    plain.seed = 21;

    optim::TrainingConfig stepped = plain;
    stepped.milestones = {3};
    stepped.decay = 0.5;

    net::NetworkState a = net::make_network(net::NetworkConfig::mini(), 8);
    net::NetworkState b = a;
    const auto ha = optim::train(a, pairs, val, plain);
    const auto hb = optim::train(b, pairs, val, stepped);
    REQUIRE(ha.size() == hb.size());
    // identical until the milestone epoch starts
    REQUIRE(ha[0].train_l1 == hb[0].train_l1);
    REQUIRE(ha[1].train_l1 == hb[1].train_l1);
    REQUIRE(ha[2].train_l1 != hb[2].train_l1);
}

TEST_CASE("training is deterministic and thread-count invariant", "[optim]") {
    const auto pairs = make_sample_set(5, 1100);
    const auto val = make_sample_set(2, 1200);

    optim::TrainingConfig cfg;
    cfg.epochs = 3;
    cfg.learning_rate = 1e-3;
    cfg.milestones = {2};
    cfg.batch_pairs = 2;
    cfg.seed = 77;

    net::NetworkState a = net::make_network(net::NetworkConfig::mini(), 13);
    net::NetworkState b = a;
    net::NetworkState c = a;

    const auto ha = optim::train(a, pairs, val, cfg);
    const auto hb = optim::train(b, pairs, val, cfg);
    cfg.threads = 3;
    const auto hc = optim::train(c, pairs, val, cfg);

    REQUIRE(ha.size() == hb.size());
    REQUIRE(ha.size() == hc.size());
    for (std::size_t i = 0; i < ha.size(); ++i) {
        REQUIRE(ha[i].train_l1 == hb[i].train_l1);
        REQUIRE(ha[i].val_l1 == hb[i].val_l1);
        REQUIRE(ha[i].val_psnr == hb[i].val_psnr);
        REQUIRE(ha[i].train_l1 == hc[i].train_l1);
        REQUIRE(ha[i].val_l1 == hc[i].val_l1);
    }
    REQUIRE(params_equal(a.params, b.params));
    REQUIRE(params_equal(a.params, c.params));
    REQUIRE(a.step == c.step);
}

TEST_CASE("train rejects diverged parameters", "[optim]") {
    const auto pairs = make_sample_set(2, 1300);
    const auto val = make_sample_set(1, 1400);
    net::NetworkState state = net::make_network(net::NetworkConfig::mini(), 2);
    // poison the parameters so the first forward pass overflows
    net::visit_params(state.params, [](double* p, std::size_t len) {
        for (std::size_t i = 0; i < len; ++i) p[i] = 1e200;
    });
    optim::TrainingConfig cfg;
    cfg.epochs = 1;
    cfg.learning_rate = 1e-3;
    cfg.milestones = {};
    cfg.batch_pairs = 2;
    REQUIRE_THROWS_AS(optim::train(state, pairs, val, cfg), numeric_error);
}

TEST_CASE("history csv round trip", "[optim]") {
    std::vector<optim::EpochRecord> history(2);
    history[0] = {1, 0.125, 0.25, 31.0078125};
    history[1] = {2, 1.0 / 3.0, 0.1, 33.3333333333333};

    TempDir tmp;
    const std::string path = tmp.file("history.csv");
    optim::write_history_csv(history, path);

    std::ifstream is(path);
    REQUIRE(is.good());
    std::string line;
    REQUIRE(std::getline(is, line));
    REQUIRE(line == "epoch,train_l1,val_l1,val_psnr");
    for (const auto& rec : history) {
        REQUIRE(std::getline(is, line));
        std::istringstream ss(line);
        std::string tok;
        std::getline(ss, tok, ',');
        REQUIRE(std::stoul(tok) == rec.epoch);
        std::getline(ss, tok, ',');
        REQUIRE(std::strtod(tok.c_str(), nullptr) == rec.train_l1); // %.17g round trips
        std::getline(ss, tok, ',');
        REQUIRE(std::strtod(tok.c_str(), nullptr) == rec.val_l1);
        std::getline(ss, tok, ',');
        REQUIRE(std::strtod(tok.c_str(), nullptr) == rec.val_psnr);
    }
    REQUIRE_FALSE(std::getline(is, line));

    REQUIRE_THROWS_AS(optim::write_history_csv(history, tmp.dir() + "/no_such_dir/h.csv"),
                      io_error);
}
