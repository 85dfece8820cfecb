#include "teleop/learners/hybrids.hpp"

#include "teleop/common.hpp"

namespace teleop::learn {

void BaseLearner::fit(const WindowData& data, std::uint64_t seed) {
    if (data.size() == 0) throw DataError("fit: no training windows");
    if (data.y.rows() != static_cast<Eigen::Index>(data.size()))
        throw DataError("fit: X and y are misaligned");
    do_fit(data, seed);
    trained_ = true;
}

Eigen::MatrixXd BaseLearner::predict(const WindowData& data) const {
    if (!trained_) throw DataError(kind() + ": predict called before fit");
    return do_predict(data);
}

// ---------------------------------------------------------------------------
// TrendLstmLearner

void TrendLstmLearner::do_fit(const WindowData& data, std::uint64_t seed) {
    const Eigen::MatrixXd exog = flatten_windows(data);
    for (int d = 0; d < 2; ++d) {
        trend_[static_cast<std::size_t>(d)].fit(data.t, data.y.col(d), exog, cfg_.trend);
        const Eigen::VectorXd residual =
            data.y.col(d) - trend_[static_cast<std::size_t>(d)].predict(data.t, exog);

        auto& net = residual_net_[static_cast<std::size_t>(d)];
        net = LstmRegressor(static_cast<Eigen::Index>(data.n_features()), cfg_.units, cfg_.dropout, 1);
        net.init_weights(seed + static_cast<std::uint64_t>(d) * 7919ull);
        train_network(net, data.with_targets(residual), cfg_.train,
                      seed + static_cast<std::uint64_t>(d) * 104729ull);
    }
}

Eigen::MatrixXd TrendLstmLearner::do_predict(const WindowData& data) const {
    const Eigen::MatrixXd exog = flatten_windows(data);
    Eigen::MatrixXd out(static_cast<Eigen::Index>(data.size()), 2);
    for (int d = 0; d < 2; ++d) {
        out.col(d) = trend_[static_cast<std::size_t>(d)].predict(data.t, exog) +
                     residual_net_[static_cast<std::size_t>(d)].predict(data.X).col(0);
    }
    return out;
}

void TrendLstmLearner::zero_residual_heads() {
    for (auto& net : residual_net_) {
        for (ParamBlock* p : net.head().params()) p->value.setZero();
    }
}

nlohmann::json TrendLstmLearner::save() const {
    return {{"kind", kind()},
            {"trend_n1", trend_[0].save()},
            {"trend_m2", trend_[1].save()},
            {"net_n1", residual_net_[0].save()},
            {"net_m2", residual_net_[1].save()}};
}

void TrendLstmLearner::load(const nlohmann::json& j) {
    trend_[0].load(j.at("trend_n1"));
    trend_[1].load(j.at("trend_m2"));
    residual_net_[0].load(j.at("net_n1"));
    residual_net_[1].load(j.at("net_m2"));
    trained_ = true;
}

// ---------------------------------------------------------------------------
// ConvLstmLearner

void ConvLstmLearner::do_fit(const WindowData& data, std::uint64_t seed) {
    if (static_cast<Eigen::Index>(data.window_len()) < cfg_.kernel)
        throw DataError("conv_lstm: window shorter than the kernel");
    net_ = ConvLstmNet(static_cast<Eigen::Index>(data.n_features()), cfg_.filters, cfg_.kernel,
                       cfg_.pool, cfg_.units, cfg_.dropout, 2);
    net_.init_weights(seed);
    train_network(net_, data, cfg_.train, seed + 17ull);
}

Eigen::MatrixXd ConvLstmLearner::do_predict(const WindowData& data) const {
    return net_.predict(data.X);
}

nlohmann::json ConvLstmLearner::save() const {
    return {{"kind", kind()}, {"net", net_.save()}};
}

void ConvLstmLearner::load(const nlohmann::json& j) {
    net_.load(j.at("net"));
    trained_ = true;
}

// ---------------------------------------------------------------------------
// LstmClusterForestLearner

Eigen::MatrixXd LstmClusterForestLearner::augmented_features(const WindowData& data,
                                                             const Eigen::MatrixXd& primary) const {
    const Eigen::MatrixXd flat = flatten_windows(data);
    Eigen::MatrixXd aug(flat.rows(), flat.cols() + primary.cols());
    aug << flat, primary;
    return aug;
}

void LstmClusterForestLearner::do_fit(const WindowData& data, std::uint64_t seed) {
    net_ = LstmRegressor(static_cast<Eigen::Index>(data.n_features()), cfg_.units, cfg_.dropout, 2);
    net_.init_weights(seed);
    train_network(net_, data, cfg_.train, seed + 23ull);

    const Eigen::MatrixXd primary = net_.predict(data.X);
    const Eigen::MatrixXd aug = augmented_features(data, primary);

    kmeans_.fit(aug, cfg_.kmeans, seed + 31ull);
    const std::vector<int>& labels = kmeans_.train_labels();

    Eigen::MatrixXd rf_feats(aug.rows(), aug.cols() + cfg_.kmeans.k);
    rf_feats.leftCols(aug.cols()) = aug;
    rf_feats.rightCols(cfg_.kmeans.k).setZero();
    for (Eigen::Index i = 0; i < aug.rows(); ++i) {
        rf_feats(i, aug.cols() + labels[static_cast<std::size_t>(i)]) = 1.0;
    }

    const Eigen::MatrixXd residual = data.y - primary;
    forest_.fit(rf_feats, residual, cfg_.forest, seed + 41ull);
    has_forest_ = true;
}

Eigen::MatrixXd LstmClusterForestLearner::do_predict(const WindowData& data) const {
    const Eigen::MatrixXd primary = net_.predict(data.X);
    if (!has_forest_) return primary;

    const Eigen::MatrixXd aug = augmented_features(data, primary);
    const std::vector<int> labels = kmeans_.assign(aug);

    Eigen::MatrixXd rf_feats(aug.rows(), aug.cols() + kmeans_.centroids().rows());
    rf_feats.leftCols(aug.cols()) = aug;
    rf_feats.rightCols(kmeans_.centroids().rows()).setZero();
    for (Eigen::Index i = 0; i < aug.rows(); ++i) {
        rf_feats(i, aug.cols() + labels[static_cast<std::size_t>(i)]) = 1.0;
    }
    return primary + forest_.predict(rf_feats);
}

std::vector<int> LstmClusterForestLearner::cluster_labels(const WindowData& data) const {
    const Eigen::MatrixXd primary = net_.predict(data.X);
    return kmeans_.assign(augmented_features(data, primary));
}

nlohmann::json LstmClusterForestLearner::save() const {
    return {{"kind", kind()},
            {"net", net_.save()},
            {"kmeans", kmeans_.save()},
            {"forest", forest_.save()},
            {"k", cfg_.kmeans.k}};
}

void LstmClusterForestLearner::load(const nlohmann::json& j) {
    net_.load(j.at("net"));
    kmeans_.load(j.at("kmeans"));
    forest_.load(j.at("forest"));
    cfg_.kmeans.k = j.at("k").get<int>();
    has_forest_ = true;
    trained_ = true;
}

// ---------------------------------------------------------------------------
// Bundle

std::vector<LearnerFactory> LearnerBundle::factories() const {
    return {
        [cfg = trend_lstm] { return std::make_unique<TrendLstmLearner>(cfg); },
        [cfg = lstm_cluster_forest] { return std::make_unique<LstmClusterForestLearner>(cfg); },
        [cfg = conv_lstm] { return std::make_unique<ConvLstmLearner>(cfg); },
    };
}

std::vector<std::string> LearnerBundle::kinds() {
    return {"trend_lstm", "lstm_cluster_forest", "conv_lstm"};
}

std::unique_ptr<BaseLearner> make_learner(const std::string& kind, const LearnerBundle& bundle) {
    if (kind == "trend_lstm") return std::make_unique<TrendLstmLearner>(bundle.trend_lstm);
    if (kind == "lstm_cluster_forest")
        return std::make_unique<LstmClusterForestLearner>(bundle.lstm_cluster_forest);
    if (kind == "conv_lstm") return std::make_unique<ConvLstmLearner>(bundle.conv_lstm);
    throw ConfigError("unknown learner kind '" + kind + "'");
}

std::unique_ptr<BaseLearner> load_learner(const nlohmann::json& j) {
    const auto kind = j.at("kind").get<std::string>();
    std::unique_ptr<BaseLearner> learner;
    if (kind == "trend_lstm") {
        learner = std::make_unique<TrendLstmLearner>();
    } else if (kind == "lstm_cluster_forest") {
        learner = std::make_unique<LstmClusterForestLearner>();
    } else if (kind == "conv_lstm") {
        learner = std::make_unique<ConvLstmLearner>();
    } else {
        throw DataError("unknown learner kind '" + kind + "' in archive");
    }
    learner->load(j);
    return learner;
}

}  // namespace teleop::learn
