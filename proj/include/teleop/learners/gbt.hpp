#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "teleop/learners/forest.hpp"

#include "json.hpp"

namespace teleop::learn {

struct GbtConfig {
    int rounds = 200;
    double learning_rate = 0.05;
    int max_depth = 5;
    double subsample = 0.8;
    int min_leaf = 1;
};

// Stagewise squared-error boosting for one output dimension. Tree structure
// is learned on a per-round subsample; leaf values are then refreshed as
// full-sample residual means, which makes the full-sample training loss
// non-increasing for any learning rate in (0, 2).
class GbtRegressor {
public:
    void fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbtConfig& cfg,
             std::uint64_t seed);
    Eigen::VectorXd predict(const Eigen::MatrixXd& x) const;

    double initial_prediction() const { return init_; }
    const std::vector<double>& train_loss() const { return train_loss_; }

    nlohmann::json save() const;
    void load(const nlohmann::json& j);

private:
    double init_ = 0.0;
    double learning_rate_ = 0.05;
    std::vector<CartTree> trees_;
    std::vector<double> train_loss_;
    bool trained_ = false;
};

// One boosted model per output dimension.
class MultiGbt {
public:
    void fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const GbtConfig& cfg,
             std::uint64_t seed);
    Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;

    const GbtRegressor& model(std::size_t dim) const { return models_[dim]; }
    std::size_t output_dim() const { return models_.size(); }

    nlohmann::json save() const;
    void load(const nlohmann::json& j);

private:
    std::vector<GbtRegressor> models_;
};

}  // namespace teleop::learn
