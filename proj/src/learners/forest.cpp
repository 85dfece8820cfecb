#include "teleop/learners/forest.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "teleop/common.hpp"

namespace teleop::learn {

namespace {

Eigen::VectorXd mean_of(const Eigen::MatrixXd& y, const std::vector<Eigen::Index>& idx) {
    Eigen::VectorXd m = Eigen::VectorXd::Zero(y.cols());
    for (Eigen::Index i : idx) m += y.row(i).transpose();
    return m / static_cast<double>(idx.size());
}

struct SplitChoice {
    bool found = false;
    int feature = -1;
    double threshold = 0.0;
    double sse = std::numeric_limits<double>::infinity();
};

// Best (feature, threshold) by total SSE over all output dims, scanning
// sorted prefixes with running sums.
SplitChoice best_split(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                       const std::vector<Eigen::Index>& idx, const std::vector<int>& features,
                       int min_leaf) {
    SplitChoice best;
    const auto n = static_cast<Eigen::Index>(idx.size());
    const Eigen::Index d = y.cols();

    Eigen::VectorXd total_sum = Eigen::VectorXd::Zero(d);
    double total_sq = 0.0;
    for (Eigen::Index i : idx) {
        total_sum += y.row(i).transpose();
        total_sq += y.row(i).squaredNorm();
    }

    std::vector<Eigen::Index> sorted(idx);
    for (int f : features) {
        std::sort(sorted.begin(), sorted.end(), [&](Eigen::Index a, Eigen::Index b) {
            if (x(a, f) != x(b, f)) return x(a, f) < x(b, f);
            return a < b;
        });
        Eigen::VectorXd left_sum = Eigen::VectorXd::Zero(d);
        double left_sq = 0.0;
        for (Eigen::Index j = 0; j + 1 < n; ++j) {
            left_sum += y.row(sorted[static_cast<std::size_t>(j)]).transpose();
            left_sq += y.row(sorted[static_cast<std::size_t>(j)]).squaredNorm();
            const double v0 = x(sorted[static_cast<std::size_t>(j)], f);
            const double v1 = x(sorted[static_cast<std::size_t>(j + 1)], f);
            if (v0 == v1) continue;
            const Eigen::Index n_left = j + 1;
            const Eigen::Index n_right = n - n_left;
            if (n_left < min_leaf || n_right < min_leaf) continue;
            const Eigen::VectorXd right_sum = total_sum - left_sum;
            const double right_sq = total_sq - left_sq;
            const double sse = (left_sq - left_sum.squaredNorm() / static_cast<double>(n_left)) +
                               (right_sq - right_sum.squaredNorm() / static_cast<double>(n_right));
            if (sse < best.sse) {
                best.found = true;
                best.feature = f;
                best.threshold = 0.5 * (v0 + v1);
                best.sse = sse;
            }
        }
    }
    return best;
}

}  // namespace

int CartTree::build(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                    std::vector<Eigen::Index>& idx, int depth, const CartConfig& cfg, Rng& rng) {
    const int node_id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    nodes_[static_cast<std::size_t>(node_id)].value = mean_of(y, idx);

    if (depth >= cfg.max_depth || static_cast<int>(idx.size()) < 2 * cfg.min_leaf) return node_id;

    std::vector<int> features(static_cast<std::size_t>(x.cols()));
    std::iota(features.begin(), features.end(), 0);
    if (cfg.mtry > 0 && cfg.mtry < static_cast<int>(features.size())) {
        for (int j = 0; j < cfg.mtry; ++j) {
            const std::size_t pick =
                static_cast<std::size_t>(j) + rng.uniform_index(features.size() - static_cast<std::size_t>(j));
            std::swap(features[static_cast<std::size_t>(j)], features[pick]);
        }
        features.resize(static_cast<std::size_t>(cfg.mtry));
    }

    const SplitChoice split = best_split(x, y, idx, features, cfg.min_leaf);
    if (!split.found) return node_id;
    if (node_id == 0) root_split_sse_ = split.sse;

    std::vector<Eigen::Index> left_idx, right_idx;
    left_idx.reserve(idx.size());
    right_idx.reserve(idx.size());
    for (Eigen::Index i : idx) {
        (x(i, split.feature) <= split.threshold ? left_idx : right_idx).push_back(i);
    }
    idx.clear();
    idx.shrink_to_fit();

    nodes_[static_cast<std::size_t>(node_id)].feature = split.feature;
    nodes_[static_cast<std::size_t>(node_id)].threshold = split.threshold;
    const int left = build(x, y, left_idx, depth + 1, cfg, rng);
    nodes_[static_cast<std::size_t>(node_id)].left = left;
    const int right = build(x, y, right_idx, depth + 1, cfg, rng);
    nodes_[static_cast<std::size_t>(node_id)].right = right;
    return node_id;
}

void CartTree::fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                   const std::vector<Eigen::Index>& indices, const CartConfig& cfg, Rng& rng) {
    if (indices.empty()) throw DataError("cart tree: no training rows");
    nodes_.clear();
    root_split_sse_ = 0.0;
    std::vector<Eigen::Index> idx(indices);
    build(x, y, idx, 0, cfg, rng);
}

int CartTree::leaf_index(const Eigen::RowVectorXd& x) const {
    int node = 0;
    while (nodes_[static_cast<std::size_t>(node)].feature >= 0) {
        const Node& nd = nodes_[static_cast<std::size_t>(node)];
        node = x[nd.feature] <= nd.threshold ? nd.left : nd.right;
    }
    return node;
}

Eigen::VectorXd CartTree::predict_row(const Eigen::RowVectorXd& x) const {
    return nodes_[static_cast<std::size_t>(leaf_index(x))].value;
}

void CartTree::set_leaf_value(int node, const Eigen::VectorXd& value) {
    nodes_[static_cast<std::size_t>(node)].value = value;
}

nlohmann::json CartTree::save() const {
    nlohmann::json arr = nlohmann::json::array();
    for (const Node& n : nodes_) {
        std::vector<double> value(n.value.data(), n.value.data() + n.value.size());
        arr.push_back({{"f", n.feature},
                       {"t", n.threshold},
                       {"l", n.left},
                       {"r", n.right},
                       {"v", value}});
    }
    return arr;
}

void CartTree::load(const nlohmann::json& j) {
    nodes_.clear();
    for (const auto& nj : j) {
        Node n;
        n.feature = nj.at("f").get<int>();
        n.threshold = nj.at("t").get<double>();
        n.left = nj.at("l").get<int>();
        n.right = nj.at("r").get<int>();
        const auto v = nj.at("v").get<std::vector<double>>();
        n.value = Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
        nodes_.push_back(std::move(n));
    }
}

void RandomForest::fit(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, const ForestConfig& cfg,
                       std::uint64_t seed) {
    if (x.rows() == 0 || x.rows() != y.rows()) throw DataError("random forest: empty or misaligned data");
    out_dim_ = y.cols();
    trees_.assign(static_cast<std::size_t>(cfg.n_estimators), {});

    CartConfig tree_cfg;
    tree_cfg.max_depth = cfg.max_depth;
    tree_cfg.min_leaf = cfg.min_leaf;
    tree_cfg.mtry = cfg.mtry > 0 ? cfg.mtry
                                 : std::max(1, static_cast<int>(x.cols()) / 3);

    Rng master(seed);
    const auto n = x.rows();
    for (auto& tree : trees_) {
        Rng rng(master.next_u64());
        std::vector<Eigen::Index> boot(static_cast<std::size_t>(n));
        for (Eigen::Index& b : boot) {
            b = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(n)));
        }
        tree.fit(x, y, boot, tree_cfg, rng);
    }
    trained_ = true;
}

Eigen::MatrixXd RandomForest::predict(const Eigen::MatrixXd& x) const {
    if (!trained_) throw DataError("random forest is not trained");
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(x.rows(), out_dim_);
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (const CartTree& tree : trees_) out.row(i) += tree.predict_row(x.row(i)).transpose();
    }
    return out / static_cast<double>(trees_.size());
}

nlohmann::json RandomForest::save() const {
    nlohmann::json trees = nlohmann::json::array();
    for (const CartTree& t : trees_) trees.push_back(t.save());
    return {{"out_dim", out_dim_}, {"trees", trees}};
}

void RandomForest::load(const nlohmann::json& j) {
    out_dim_ = j.at("out_dim").get<Eigen::Index>();
    trees_.clear();
    for (const auto& tj : j.at("trees")) {
        CartTree t;
        t.load(tj);
        trees_.push_back(std::move(t));
    }
    trained_ = true;
}

}  // namespace teleop::learn
