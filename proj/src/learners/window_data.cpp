#include "teleop/learners/window_data.hpp"

#include <cmath>

namespace teleop::learn {

WindowData WindowData::slice(std::size_t begin, std::size_t end) const {
    WindowData out;
    out.X.assign(X.begin() + static_cast<std::ptrdiff_t>(begin),
                 X.begin() + static_cast<std::ptrdiff_t>(end));
    out.t = t.segment(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin));
    out.y = y.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin));
    return out;
}

WindowData WindowData::take(const std::vector<std::size_t>& indices) const {
    WindowData out;
    out.X.reserve(indices.size());
    out.t.resize(static_cast<Eigen::Index>(indices.size()));
    out.y.resize(static_cast<Eigen::Index>(indices.size()), y.cols());
    for (std::size_t i = 0; i < indices.size(); ++i) {
        out.X.push_back(X[indices[i]]);
        out.t[static_cast<Eigen::Index>(i)] = t[static_cast<Eigen::Index>(indices[i])];
        out.y.row(static_cast<Eigen::Index>(i)) = y.row(static_cast<Eigen::Index>(indices[i]));
    }
    return out;
}

WindowData WindowData::with_targets(const Eigen::MatrixXd& targets) const {
    WindowData out;
    out.X = X;
    out.t = t;
    out.y = targets;
    return out;
}

WindowData to_window_data(const data::WindowedDataset& ds) {
    return to_window_data(ds, 0, ds.size());
}

WindowData to_window_data(const data::WindowedDataset& ds, std::size_t begin, std::size_t end) {
    WindowData out;
    const auto T = static_cast<Eigen::Index>(ds.window_len);
    const auto F = static_cast<Eigen::Index>(data::kNumFeatures);
    out.X.reserve(end - begin);
    out.t.resize(static_cast<Eigen::Index>(end - begin));
    out.y.resize(static_cast<Eigen::Index>(end - begin), data::kNumTargets);
    for (std::size_t i = begin; i < end; ++i) {
        Eigen::MatrixXd w(T, F);
        for (Eigen::Index r = 0; r < T; ++r)
            for (Eigen::Index c = 0; c < F; ++c)
                w(r, c) = ds.X[i][static_cast<std::size_t>(r) * data::kNumFeatures +
                                  static_cast<std::size_t>(c)];
        out.X.push_back(std::move(w));
        out.t[static_cast<Eigen::Index>(i - begin)] = ds.t[i];
        out.y(static_cast<Eigen::Index>(i - begin), 0) = ds.y[i][0];
        out.y(static_cast<Eigen::Index>(i - begin), 1) = ds.y[i][1];
    }
    return out;
}

Eigen::MatrixXd flatten_windows(const WindowData& data) {
    const auto n = static_cast<Eigen::Index>(data.size());
    const auto F = static_cast<Eigen::Index>(data.n_features());
    Eigen::MatrixXd out(n, 3 * F);
    for (Eigen::Index i = 0; i < n; ++i) {
        const Eigen::MatrixXd& w = data.X[static_cast<std::size_t>(i)];
        const Eigen::RowVectorXd mean = w.colwise().mean();
        Eigen::RowVectorXd sd(F);
        for (Eigen::Index c = 0; c < F; ++c) {
            const double m = mean[c];
            sd[c] = std::sqrt((w.col(c).array() - m).square().mean());
        }
        out.row(i).segment(0, F) = w.row(w.rows() - 1);
        out.row(i).segment(F, F) = mean;
        out.row(i).segment(2 * F, F) = sd;
    }
    return out;
}

}  // namespace teleop::learn
