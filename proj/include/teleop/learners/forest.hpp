#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "teleop/rng.hpp"

#include "json.hpp"

namespace teleop::learn {

struct CartConfig {
    int max_depth = 20;
    int min_leaf = 1;
    int mtry = 0;  // features tried per split; 0 = all
};

// Multi-output CART regression tree with variance-reduction (SSE) splits.
// Thresholds are midpoints between consecutive distinct sorted values.
class CartTree {
public:
    struct Node {
        int feature = -1;  // -1 marks a leaf
        double threshold = 0.0;
        int left = -1, right = -1;
        Eigen::VectorXd value;
    };

    void fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
             const std::vector<Eigen::Index>& indices, const CartConfig& cfg, Rng& rng);

    Eigen::VectorXd predict_row(const Eigen::RowVectorXd& x) const;
    int leaf_index(const Eigen::RowVectorXd& x) const;
    void set_leaf_value(int node, const Eigen::VectorXd& value);
    std::size_t node_count() const { return nodes_.size(); }

    // SSE of the best split found at the root during fit (for oracle tests).
    double root_split_sse() const { return root_split_sse_; }
    bool root_was_split() const { return !nodes_.empty() && nodes_[0].feature >= 0; }

    nlohmann::json save() const;
    void load(const nlohmann::json& j);

private:
    int build(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, std::vector<Eigen::Index>& idx,
              int depth, const CartConfig& cfg, Rng& rng);

    std::vector<Node> nodes_;
    double root_split_sse_ = 0.0;
};

struct ForestConfig {
    int n_estimators = 150;
    int max_depth = 20;
    int min_leaf = 1;
    int mtry = 0;  // 0 = max(1, n_features / 3)
};

// Bagged CART regression: bootstrap sampling with replacement, per-split
// feature subsampling, forest prediction is the mean of tree predictions.
class RandomForest {
public:
    void fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const ForestConfig& cfg,
             std::uint64_t seed);
    Eigen::MatrixXd predict(const Eigen::MatrixXd& x) const;
    std::size_t tree_count() const { return trees_.size(); }

    nlohmann::json save() const;
    void load(const nlohmann::json& j);

private:
    std::vector<CartTree> trees_;
    Eigen::Index out_dim_ = 0;
    bool trained_ = false;
};

}  // namespace teleop::learn
