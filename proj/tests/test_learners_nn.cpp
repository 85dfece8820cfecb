#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "teleop/common.hpp"
#include "teleop/learners/networks.hpp"
#include "teleop/learners/nn_core.hpp"
#include "teleop/rng.hpp"

using namespace teleop;
using namespace teleop::learn;

namespace {

WindowData random_windows(std::size_t n, Eigen::Index T, Eigen::Index F, Eigen::Index D,
                          std::uint64_t seed) {
    Rng rng(seed);
    WindowData data;
    data.t.resize(static_cast<Eigen::Index>(n));
    data.y.resize(static_cast<Eigen::Index>(n), D);
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::MatrixXd w(T, F);
        for (Eigen::Index r = 0; r < T; ++r)
            for (Eigen::Index c = 0; c < F; ++c) w(r, c) = rng.uniform(-1.0, 1.0);
        data.X.push_back(std::move(w));
        data.t[static_cast<Eigen::Index>(i)] = static_cast<double>(i);
        for (Eigen::Index d = 0; d < D; ++d)
            data.y(static_cast<Eigen::Index>(i), d) = rng.uniform(-1.0, 1.0);
    }
    return data;
}

// Central finite differences against the analytic gradient over every
// parameter of a network.
double max_grad_check_error(SequenceNet& net, const WindowData& data) {
    std::vector<const Eigen::MatrixXd*> batch;
    for (const auto& w : data.X) batch.push_back(&w);

    auto loss_fn = [&] {
        return mse_loss(net.forward(batch, false, nullptr), data.y);
    };

    net.zero_grads();
    const Eigen::MatrixXd pred = net.forward(batch, false, nullptr);
    const Eigen::MatrixXd dOut = 2.0 * (pred - data.y) / static_cast<double>(pred.size());
    net.backward(dOut);

    double worst = 0.0;
    for (ParamBlock* p : net.params()) {
        for (Eigen::Index i = 0; i < p->value.rows(); ++i) {
            for (Eigen::Index j = 0; j < p->value.cols(); ++j) {
                const double orig = p->value(i, j);
                const double eps = 1e-5 * std::max(1.0, std::abs(orig));
                p->value(i, j) = orig + eps;
                const double lp = loss_fn();
                p->value(i, j) = orig - eps;
                const double lm = loss_fn();
                p->value(i, j) = orig;
                const double fd = (lp - lm) / (2.0 * eps);
                const double an = p->grad(i, j);
                // Below ~1e-6 the central difference is dominated by roundoff
                // in the loss, so compare absolutely there.
                const double rel = std::abs(an - fd) / std::max({1e-6, std::abs(an), std::abs(fd)});
                worst = std::max(worst, rel);
            }
        }
    }
    return worst;
}

}  // namespace

TEST_CASE("lstm with all-zero parameters outputs zero hidden states") {
    LstmLayer lstm(2, 3);  // parameters default to zero
    Eigen::MatrixXd window(4, 2);
    window << 1.0, -1.0, 0.5, 2.0, -0.3, 0.7, 0.0, 1.0;
    const Eigen::MatrixXd seq = lstm.hidden_sequence(window);
    CHECK(seq.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("single-step cell matches a hand computation") {
    // 1 unit, 1 step, all weights zero, biases zero except candidate +10 and
    // output gate +10.
    LstmLayer lstm(1, 1);
    for (ParamBlock* p : lstm.params()) p->value.setZero();
    lstm.params()[2]->value(2, 0) = 10.0;  // candidate bias (gate order i,f,g,o)
    lstm.params()[2]->value(3, 0) = 10.0;  // output gate bias

    Eigen::MatrixXd window(1, 1);
    window << 0.0;
    const double h = lstm.hidden_sequence(window)(0, 0);

    // Hand oracle for the same step:
    const auto sigma = [](double x) { return 1.0 / (1.0 + std::exp(-x)); };
    const double i_gate = sigma(0.0);
    const double f_gate = sigma(0.0);
    const double g_cand = std::tanh(10.0);
    const double o_gate = sigma(10.0);
    const double c = f_gate * 0.0 + i_gate * g_cand;
    const double h_expected = o_gate * std::tanh(c);

    CHECK(h == doctest::Approx(h_expected).epsilon(1e-15));
    CHECK(h_expected == doctest::Approx(sigma(10.0) * std::tanh(0.5 * std::tanh(10.0))));
}

TEST_CASE("constant input drives the hidden state to a fixed point") {
    LstmLayer lstm(2, 4);
    Rng rng(33);
    lstm.init_weights(rng, 0.4);

    Eigen::MatrixXd window(60, 2);
    for (Eigen::Index t = 0; t < window.rows(); ++t) window.row(t) << 0.7, -0.2;
    const Eigen::MatrixXd seq = lstm.hidden_sequence(window);

    double prev_diff = (seq.row(1) - seq.row(0)).norm();
    for (Eigen::Index t = 2; t < seq.rows(); ++t) {
        const double diff = (seq.row(t) - seq.row(t - 1)).norm();
        CHECK(diff <= prev_diff + 1e-12);
        prev_diff = diff;
    }
    CHECK(prev_diff < 1e-6);
}

TEST_CASE("gate activations stay in range and parameter count is consistent") {
    LstmRegressor net(3, 5, 0.0, 2);
    net.init_weights(101);
    CHECK(net.param_count() == 4u * 5u * (3u + 5u + 1u) + (5u * 2u + 2u));

    Rng rng(7);
    Eigen::MatrixXd window(20, 3);
    for (Eigen::Index t = 0; t < 20; ++t)
        for (Eigen::Index c = 0; c < 3; ++c) window(t, c) = rng.uniform(-3.0, 3.0);
    const Eigen::MatrixXd seq = net.lstm().hidden_sequence(window);
    CHECK(seq.cwiseAbs().maxCoeff() <= 1.0);  // tanh-bounded hidden state
}

TEST_CASE("recurrent regressor gradients match finite differences") {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const WindowData data = random_windows(4, 5, 2, 2, seed);
        LstmRegressor net(2, 3, 0.0, 2);
        net.init_weights(seed * 31);
        worst = std::max(worst, max_grad_check_error(net, data));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("conv-lstm gradients match finite differences") {
    double worst = 0.0;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
        const WindowData data = random_windows(3, 8, 2, 2, seed + 100);
        ConvLstmNet net(2, 3, 3, 2, 3, 0.0, 2);
        net.init_weights(seed * 57);
        worst = std::max(worst, max_grad_check_error(net, data));
    }
    CHECK(worst < 1e-4);
}

TEST_CASE("convolution with a centered identity kernel reproduces the input") {
    Conv1DLayer conv(1, 1, 5);
    conv.params()[0]->value << 0.0, 0.0, 1.0, 0.0, 0.0;
    conv.params()[1]->value.setZero();

    Rng rng(5);
    Eigen::MatrixXd window(30, 1);
    for (Eigen::Index t = 0; t < 30; ++t) window(t, 0) = rng.uniform(0.1, 2.0);  // positive: ReLU inert

    const Eigen::MatrixXd out = conv.apply(window, true);
    REQUIRE(out.rows() == 26);  // valid convolution: T - kernel + 1
    for (Eigen::Index t = 0; t < out.rows(); ++t) {
        CHECK(out(t, 0) == doctest::Approx(window(t + 2, 0)).epsilon(1e-15));
    }
}

TEST_CASE("max pooling takes pairwise maxima") {
    Eigen::MatrixXd seq(4, 1);
    seq << 1.0, 3.0, 2.0, 5.0;
    const Eigen::MatrixXd pooled = MaxPool1D::apply(seq, 2);
    REQUIRE(pooled.rows() == 2);
    CHECK(pooled(0, 0) == 3.0);
    CHECK(pooled(1, 0) == 5.0);
}

TEST_CASE("all-zero windows predict the output bias") {
    ConvLstmNet net(2, 4, 3, 2, 5, 0.3, 2);
    net.init_weights(77);  // random weights, zero biases
    net.head().bias().value << 0.25, -1.5;

    std::vector<Eigen::MatrixXd> zeros{Eigen::MatrixXd::Zero(12, 2)};
    const Eigen::MatrixXd pred = net.predict(zeros);
    CHECK(pred(0, 0) == doctest::Approx(0.25).epsilon(1e-15));
    CHECK(pred(0, 1) == doctest::Approx(-1.5).epsilon(1e-15));
}

TEST_CASE("training a zero-initialized net on zero targets exits immediately") {
    WindowData data = random_windows(30, 6, 2, 1, 9);
    data.y.setZero();

    LstmRegressor net(2, 4, 0.0, 1);
    for (ParamBlock* p : net.params()) p->value.setZero();

    TrainConfig cfg;
    cfg.epochs = 50;
    const TrainResult result = train_network(net, data, cfg, 1);
    CHECK(result.epochs_run == 1);
    CHECK(result.train_loss.front() == 0.0);
}

TEST_CASE("a small net fits a noiseless linear map") {
    Rng rng(55);
    WindowData data;
    const Eigen::Index T = 6, F = 2;
    data.t.resize(50);
    data.y.resize(50, 1);
    for (int i = 0; i < 50; ++i) {
        Eigen::MatrixXd w(T, F);
        for (Eigen::Index r = 0; r < T; ++r)
            for (Eigen::Index c = 0; c < F; ++c) w(r, c) = rng.uniform(-1.0, 1.0);
        data.y(i, 0) = 0.8 * w(T - 1, 0) - 0.5 * w(T - 1, 1);
        data.X.push_back(std::move(w));
        data.t[i] = i;
    }

    LstmRegressor net(2, 8, 0.0, 1);
    net.init_weights(4242);
    TrainConfig cfg;
    cfg.epochs = 400;
    cfg.batch_size = 10;
    cfg.patience = 400;
    cfg.inner_val_fraction = 0.0;
    cfg.adam.lr = 0.01;
    train_network(net, data, cfg, 7);

    const double mse = mse_loss(net.predict(data.X), data.y);
    CHECK(mse < 1e-3);
}

TEST_CASE("training diverging to non-finite loss raises a diagnostic") {
    WindowData data = random_windows(20, 4, 2, 1, 11);
    data.y.array() += 1e8;  // huge targets
    LstmRegressor net(2, 3, 0.0, 1);
    net.init_weights(3);
    TrainConfig cfg;
    cfg.epochs = 50;
    cfg.adam.lr = 1e200;  // absurd step size forces overflow
    CHECK_THROWS_AS(train_network(net, data, cfg, 1), DataError);
}

TEST_CASE("training is deterministic for a fixed seed") {
    const WindowData data = random_windows(40, 6, 3, 2, 13);
    TrainConfig cfg;
    cfg.epochs = 4;
    cfg.batch_size = 8;

    LstmRegressor a(3, 4, 0.3, 2), b(3, 4, 0.3, 2);
    a.init_weights(900);
    b.init_weights(900);
    train_network(a, data, cfg, 21);
    train_network(b, data, cfg, 21);

    const Eigen::MatrixXd pa = a.predict(data.X);
    const Eigen::MatrixXd pb = b.predict(data.X);
    CHECK((pa - pb).cwiseAbs().maxCoeff() == 0.0);

    auto pas = a.params();
    auto pbs = b.params();
    for (std::size_t i = 0; i < pas.size(); ++i) {
        CHECK((pas[i]->value - pbs[i]->value).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("network JSON round-trip preserves predictions bit for bit") {
    const WindowData data = random_windows(10, 8, 3, 2, 17);
    ConvLstmNet net(3, 4, 3, 2, 4, 0.3, 2);
    net.init_weights(31);
    TrainConfig cfg;
    cfg.epochs = 2;
    train_network(net, data, cfg, 5);

    const nlohmann::json j = nlohmann::json::parse(net.save().dump());
    ConvLstmNet back;
    back.load(j);
    const Eigen::MatrixXd pa = net.predict(data.X);
    const Eigen::MatrixXd pb = back.predict(data.X);
    CHECK((pa - pb).cwiseAbs().maxCoeff() == 0.0);
}
