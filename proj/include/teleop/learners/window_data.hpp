#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "teleop/dataset.hpp"

namespace teleop::learn {

// Windowed supervised data in matrix form: each window is window_len x
// n_features, targets one row per window.
struct WindowData {
    std::vector<Eigen::MatrixXd> X;
    Eigen::VectorXd t;  // window-end time, used by trend models
    Eigen::MatrixXd y;  // n x n_targets

    std::size_t size() const { return X.size(); }
    std::size_t window_len() const { return X.empty() ? 0 : static_cast<std::size_t>(X[0].rows()); }
    std::size_t n_features() const { return X.empty() ? 0 : static_cast<std::size_t>(X[0].cols()); }

    WindowData slice(std::size_t begin, std::size_t end) const;
    WindowData take(const std::vector<std::size_t>& indices) const;
    // Same windows, different target matrix (e.g. residuals or one dimension).
    WindowData with_targets(const Eigen::MatrixXd& targets) const;
};

WindowData to_window_data(const data::WindowedDataset& ds);
WindowData to_window_data(const data::WindowedDataset& ds, std::size_t begin, std::size_t end);

// Per-window summary features for the tree/cluster stages: the final
// timestep's features plus the window mean and window standard deviation of
// each feature (3 * n_features columns).
Eigen::MatrixXd flatten_windows(const WindowData& data);

}  // namespace teleop::learn
