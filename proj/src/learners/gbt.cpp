#include "teleop/learners/gbt.hpp"

#include <algorithm>
#include <numeric>

#include "teleop/common.hpp"
#include "teleop/rng.hpp"

namespace teleop::learn {

void GbtRegressor::fit(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const GbtConfig& cfg,
                       std::uint64_t seed) {
    const Eigen::Index n = x.rows();
    if (n == 0 || n != y.size()) throw DataError("gbt: empty or misaligned data");

    init_ = y.mean();
    learning_rate_ = cfg.learning_rate;
    trees_.clear();
    train_loss_.clear();

    Eigen::VectorXd pred = Eigen::VectorXd::Constant(n, init_);
    CartConfig tree_cfg;
    tree_cfg.max_depth = cfg.max_depth;
    tree_cfg.min_leaf = cfg.min_leaf;
    tree_cfg.mtry = 0;

    Rng master(seed);
    const auto n_sub = std::max<Eigen::Index>(
        1, static_cast<Eigen::Index>(cfg.subsample * static_cast<double>(n)));

    std::vector<Eigen::Index> all(static_cast<std::size_t>(n));
    std::iota(all.begin(), all.end(), 0);

    for (int round = 0; round < cfg.rounds; ++round) {
        Rng rng(master.next_u64());
        const Eigen::VectorXd residual = y - pred;

        std::vector<Eigen::Index> sub(all);
        if (n_sub < n) {
            rng.shuffle(sub);
            sub.resize(static_cast<std::size_t>(n_sub));
            std::sort(sub.begin(), sub.end());
        }

        CartTree tree;
        tree.fit(x, residual, sub, tree_cfg, rng);

        // Refresh leaves on the full sample so every update is a descent step.
        std::vector<double> leaf_sum(tree.node_count(), 0.0);
        std::vector<Eigen::Index> leaf_count(tree.node_count(), 0);
        std::vector<int> leaf_of(static_cast<std::size_t>(n));
        for (Eigen::Index i = 0; i < n; ++i) {
            const int leaf = tree.leaf_index(x.row(i));
            leaf_of[static_cast<std::size_t>(i)] = leaf;
            leaf_sum[static_cast<std::size_t>(leaf)] += residual[i];
            ++leaf_count[static_cast<std::size_t>(leaf)];
        }
        for (std::size_t node = 0; node < tree.node_count(); ++node) {
            if (leaf_count[node] > 0) {
                tree.set_leaf_value(static_cast<int>(node),
                                    Eigen::VectorXd::Constant(1, leaf_sum[node] /
                                                                     static_cast<double>(leaf_count[node])));
            }
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            if (leaf_count[static_cast<std::size_t>(leaf_of[static_cast<std::size_t>(i)])] > 0) {
                pred[i] += learning_rate_ *
                           leaf_sum[static_cast<std::size_t>(leaf_of[static_cast<std::size_t>(i)])] /
                           static_cast<double>(
                               leaf_count[static_cast<std::size_t>(leaf_of[static_cast<std::size_t>(i)])]);
            }
        }
        trees_.push_back(std::move(tree));
        train_loss_.push_back((y - pred).squaredNorm() / static_cast<double>(n));
    }
    trained_ = true;
}

Eigen::VectorXd GbtRegressor::predict(const Eigen::MatrixXd& x) const {
    if (!trained_) throw DataError("gbt model is not trained");
    Eigen::VectorXd out = Eigen::VectorXd::Constant(x.rows(), init_);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (const CartTree& tree : trees_) {
            out[i] += learning_rate_ * tree.predict_row(x.row(i))[0];
        }
    }
    return out;
}

nlohmann::json GbtRegressor::save() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const CartTree& t : trees_) trees.push_back(t.save());
    return {{"init", init_}, {"learning_rate", learning_rate_}, {"trees", trees}};
}

void GbtRegressor::load(const nlohmann::json& j) {
    init_ = j.at("init").get<double>();
    learning_rate_ = j.at("learning_rate").get<double>();
    trees_.clear();
    for (const auto& tj : j.at("trees")) {
        CartTree t;
        t.load(tj);
        trees_.push_back(std::move(t));
    }
    trained_ = true;
}

void MultiGbt::fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const GbtConfig& cfg,
                   std::uint64_t seed) {
    models_.assign(static_cast<std::size_t>(y.cols()), {});
    for (Eigen::Index d = 0; d < y.cols(); ++d) {
        models_[static_cast<std::size_t>(d)].fit(x, y.col(d), cfg,
                                                 seed + static_cast<std::uint64_t>(d) * 1000003ull);
    }
}

Eigen::MatrixXd MultiGbt::predict(const Eigen::MatrixXd& x) const {
    if (models_.empty()) throw DataError("gbt model is not trained");
    Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(models_.size()));
    for (std::size_t d = 0; d < models_.size(); ++d) {
        out.col(static_cast<Eigen::Index>(d)) = models_[d].predict(x);
    }
    return out;
}

nlohmann::json MultiGbt::save() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& m : models_) arr.push_back(m.save());
    return {{"models", arr}};
}

void MultiGbt::load(const nlohmann::json& j) {
    models_.clear();
    for (const auto& mj : j.at("models")) {
        GbtRegressor m;
        m.load(mj);
        models_.push_back(std::move(m));
    }
}

}  // namespace teleop::learn
