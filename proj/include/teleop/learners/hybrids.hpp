#pragma once

#include <array>
#include <vector>

#include "teleop/learners/base_learner.hpp"
#include "teleop/learners/forest.hpp"
#include "teleop/learners/kmeans.hpp"
#include "teleop/learners/networks.hpp"
#include "teleop/learners/trend_season.hpp"

namespace teleop::learn {

struct TrendLstmConfig {
    TrendSeasonConfig trend{};
    int units = 64;
    double dropout = 0.3;
    TrainConfig train{};
};

// Decomposable trend/seasonality model per output dimension plus a recurrent
// net trained on its residuals; predictions add the two parts.
class TrendLstmLearner : public BaseLearner {
public:
    TrendLstmLearner() = default;
    explicit TrendLstmLearner(TrendLstmConfig cfg) : cfg_(cfg) {}

    std::string kind() const override { return "trend_lstm"; }
    nlohmann::json save() const override;
    void load(const nlohmann::json& j) override;

    // Test hook: zero the residual nets' dense heads so predictions reduce to
    // the trend component.
    void zero_residual_heads();

protected:
    void do_fit(const WindowData& data, std::uint64_t seed) override;
    Eigen::MatrixXd do_predict(const WindowData& data) const override;

private:
    TrendLstmConfig cfg_;
    std::array<TrendSeasonModel, 2> trend_;
    std::array<LstmRegressor, 2> residual_net_;
};

struct ConvLstmConfig {
    int filters = 64;
    int kernel = 5;
    int pool = 2;
    int units = 100;
    double dropout = 0.3;
    TrainConfig train{};
};

// Unified convolutional front end + recurrent layer + dense head.
class ConvLstmLearner : public BaseLearner {
public:
    ConvLstmLearner() = default;
    explicit ConvLstmLearner(ConvLstmConfig cfg) : cfg_(cfg) {}

    std::string kind() const override { return "conv_lstm"; }
    nlohmann::json save() const override;
    void load(const nlohmann::json& j) override;

    ConvLstmNet& net() { return net_; }

protected:
    void do_fit(const WindowData& data, std::uint64_t seed) override;
    Eigen::MatrixXd do_predict(const WindowData& data) const override;

private:
    ConvLstmConfig cfg_;
    ConvLstmNet net_;
};

struct LstmForestConfig {
    int units = 64;
    double dropout = 0.3;
    KMeansConfig kmeans{};
    ForestConfig forest{};
    TrainConfig train{};
};

// Recurrent primary predictor; its predictions augment the flattened window
// features, a k-means labeling (one-hot) augments them again, and a random
// forest regresses the primary's residuals on the result.
class LstmClusterForestLearner : public BaseLearner {
public:
    LstmClusterForestLearner() = default;
    explicit LstmClusterForestLearner(LstmForestConfig cfg) : cfg_(cfg) {}

    std::string kind() const override { return "lstm_cluster_forest"; }
    nlohmann::json save() const override;
    void load(const nlohmann::json& j) override;

    const KMeansModel& clusters() const { return kmeans_; }
    std::vector<int> cluster_labels(const WindowData& data) const;

    // Test hook: drop the residual forest so predictions reduce to the
    // primary net.
    void drop_residual_forest() { has_forest_ = false; }

protected:
    void do_fit(const WindowData& data, std::uint64_t seed) override;
    Eigen::MatrixXd do_predict(const WindowData& data) const override;

private:
    Eigen::MatrixXd augmented_features(const WindowData& data, const Eigen::MatrixXd& primary) const;

    LstmForestConfig cfg_;
    LstmRegressor net_;
    KMeansModel kmeans_;
    RandomForest forest_;
    bool has_forest_ = true;
};

// The three level-0 learners in the canonical column order.
struct LearnerBundle {
    TrendLstmConfig trend_lstm;
    LstmForestConfig lstm_cluster_forest;
    ConvLstmConfig conv_lstm;

    std::vector<LearnerFactory> factories() const;
    static std::vector<std::string> kinds();
};

std::unique_ptr<BaseLearner> make_learner(const std::string& kind, const LearnerBundle& bundle);
std::unique_ptr<BaseLearner> load_learner(const nlohmann::json& j);

}  // namespace teleop::learn
