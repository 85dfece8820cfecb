#include "teleop/learners/trend_season.hpp"

#include <cmath>
#include <numbers>

#include "teleop/common.hpp"
#include "teleop/learners/nn_core.hpp"

namespace teleop::learn {

Eigen::MatrixXd TrendSeasonModel::design(const Eigen::VectorXd& t,
                                         const Eigen::MatrixXd& x_exog) const {
    const Eigen::Index n = t.size();
    const auto n_cp = static_cast<Eigen::Index>(changepoints_.size());
    const Eigen::Index n_fourier = 2 * cfg_.fourier_order;
    const Eigen::Index n_exog = x_exog.cols();
    Eigen::MatrixXd d(n, 2 + n_cp + n_fourier + n_exog);

    d.col(0).setOnes();
    d.col(1) = t;
    for (Eigen::Index j = 0; j < n_cp; ++j) {
        d.col(2 + j) = (t.array() - changepoints_[static_cast<std::size_t>(j)]).cwiseMax(0.0);
    }
    for (int h = 0; h < cfg_.fourier_order; ++h) {
        const double omega = 2.0 * std::numbers::pi * (h + 1) / cfg_.period;
        d.col(2 + n_cp + 2 * h) = (omega * t.array()).sin();
        d.col(2 + n_cp + 2 * h + 1) = (omega * t.array()).cos();
    }
    if (n_exog > 0) d.rightCols(n_exog) = x_exog;
    return d;
}

void TrendSeasonModel::fit(const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                           const Eigen::MatrixXd& x_exog, const TrendSeasonConfig& cfg) {
    const Eigen::Index n = t.size();
    if (n < 2) throw DataError("trend-season fit needs at least 2 samples");
    for (Eigen::Index i = 1; i < n; ++i) {
        if (t[i] <= t[i - 1]) throw DataError("trend-season fit needs strictly increasing t");
    }
    if (x_exog.rows() != 0 && x_exog.rows() != n)
        throw DataError("trend-season fit: exogenous rows misaligned");

    cfg_ = cfg;
    changepoints_.clear();
    const double lo = t[0], hi = t[n - 1];
    for (int j = 1; j <= cfg.n_changepoints; ++j) {
        changepoints_.push_back(lo + (hi - lo) * j / (cfg.n_changepoints + 1));
    }

    const Eigen::MatrixXd d = design(t, x_exog);
    Eigen::VectorXd theta;
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(d);
    if (qr.rank() < d.cols()) {
        used_ridge_ = true;
        const Eigen::MatrixXd gram =
            d.transpose() * d + cfg.ridge * Eigen::MatrixXd::Identity(d.cols(), d.cols());
        theta = gram.ldlt().solve(d.transpose() * y);
    } else {
        used_ridge_ = false;
        theta = qr.solve(y);
    }

    const auto n_cp = static_cast<Eigen::Index>(changepoints_.size());
    const Eigen::Index n_fourier = 2 * cfg.fourier_order;
    trend_coef_ = theta.segment(0, 2 + n_cp);
    seasonal_coef_ = theta.segment(2 + n_cp, n_fourier);
    exog_coef_ = theta.tail(x_exog.cols());
    trained_ = true;
}

Eigen::VectorXd TrendSeasonModel::predict_trend(const Eigen::VectorXd& t) const {
    if (!trained_) throw DataError("trend-season model is not trained");
    Eigen::VectorXd out = Eigen::VectorXd::Constant(t.size(), trend_coef_[0]);
    out += trend_coef_[1] * t;
    for (std::size_t j = 0; j < changepoints_.size(); ++j) {
        out.array() +=
            trend_coef_[2 + static_cast<Eigen::Index>(j)] * (t.array() - changepoints_[j]).cwiseMax(0.0);
    }
    return out;
}

Eigen::VectorXd TrendSeasonModel::predict_seasonal(const Eigen::VectorXd& t) const {
    if (!trained_) throw DataError("trend-season model is not trained");
    Eigen::VectorXd out = Eigen::VectorXd::Zero(t.size());
    for (int h = 0; h < cfg_.fourier_order; ++h) {
        const double omega = 2.0 * std::numbers::pi * (h + 1) / cfg_.period;
        out.array() += seasonal_coef_[2 * h] * (omega * t.array()).sin() +
                       seasonal_coef_[2 * h + 1] * (omega * t.array()).cos();
    }
    return out;
}

Eigen::VectorXd TrendSeasonModel::predict(const Eigen::VectorXd& t,
                                          const Eigen::MatrixXd& x_exog) const {
    Eigen::VectorXd out = predict_trend(t) + predict_seasonal(t);
    if (exog_coef_.size() > 0 && x_exog.cols() == exog_coef_.size()) {
        out += x_exog * exog_coef_;
    } else if (exog_coef_.size() > 0) {
        throw DataError("trend-season predict: exogenous column mismatch");
    }
    return out;
}

double TrendSeasonModel::residual_orthogonality(const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                                                const Eigen::MatrixXd& x_exog) const {
    const Eigen::MatrixXd d = design(t, x_exog);
    const Eigen::VectorXd r = y - predict(t, x_exog);
    return (d.transpose() * r).cwiseAbs().maxCoeff();
}

nlohmann::json TrendSeasonModel::save() const {
    return {{"n_changepoints", cfg_.n_changepoints},
            {"period", cfg_.period},
            {"fourier_order", cfg_.fourier_order},
            {"ridge", cfg_.ridge},
            {"mode", "multiplicative"},
            {"changepoints", changepoints_},
            {"trend", matrix_to_json(trend_coef_)},
            {"seasonal", matrix_to_json(seasonal_coef_)},
            {"exog", matrix_to_json(exog_coef_)},
            {"used_ridge", used_ridge_}};
}

void TrendSeasonModel::load(const nlohmann::json& j) {
    cfg_.n_changepoints = j.at("n_changepoints").get<int>();
    cfg_.period = j.at("period").get<double>();
    cfg_.fourier_order = j.at("fourier_order").get<int>();
    cfg_.ridge = j.at("ridge").get<double>();
    changepoints_ = j.at("changepoints").get<std::vector<double>>();
    trend_coef_ = matrix_from_json(j.at("trend"));
    seasonal_coef_ = matrix_from_json(j.at("seasonal"));
    exog_coef_ = matrix_from_json(j.at("exog"));
    used_ridge_ = j.at("used_ridge").get<bool>();
    trained_ = true;
}

}  // namespace teleop::learn
