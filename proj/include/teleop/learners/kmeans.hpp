#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "json.hpp"

namespace teleop::learn {

struct KMeansConfig {
    int k = 5;
    int max_iter = 100;
};

// Lloyd's algorithm with distance-weighted seeding. Empty clusters are
// reseeded to the point farthest from its current centroid.
class KMeansModel {
public:
    void fit(const Eigen::MatrixXd& points, const KMeansConfig& cfg, std::uint64_t seed);

    std::vector<int> assign(const Eigen::MatrixXd& points) const;
    const Eigen::MatrixXd& centroids() const { return centroids_; }
    double inertia() const { return inertia_; }
    const std::vector<double>& inertia_history() const { return inertia_history_; }
    const std::vector<int>& train_labels() const { return train_labels_; }

    nlohmann::json save() const;
    void load(const nlohmann::json& j);

private:
    Eigen::MatrixXd centroids_;  // k x dims
    double inertia_ = 0.0;
    std::vector<double> inertia_history_;
    std::vector<int> train_labels_;
    bool trained_ = false;
};

}  // namespace teleop::learn
