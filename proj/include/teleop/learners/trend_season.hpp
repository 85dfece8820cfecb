#pragma once

#include <Eigen/Dense>
#include <vector>

#include "json.hpp"

namespace teleop::learn {

struct TrendSeasonConfig {
    int n_changepoints = 10;
    double period = 10.0;   // seconds
    int fourier_order = 3;  // harmonic pairs
    double ridge = 1e-8;    // fallback regularization for rank-deficient fits
};

// Decomposable forecaster: piecewise-linear trend over a changepoint grid,
// Fourier seasonality, and linear exogenous regressors, fit jointly by least
// squares. The multiplicative composition trend * (1 + s) + exog uses the
// relative seasonality s = (Fourier part) / trend, so evaluation never
// divides; the absolute Fourier part is added directly.
class TrendSeasonModel {
public:
    TrendSeasonModel() = default;

    void fit(const Eigen::VectorXd& t, const Eigen::VectorXd& y, const Eigen::MatrixXd& x_exog,
             const TrendSeasonConfig& cfg);

    Eigen::VectorXd predict(const Eigen::VectorXd& t, const Eigen::MatrixXd& x_exog) const;
    Eigen::VectorXd predict_trend(const Eigen::VectorXd& t) const;
    Eigen::VectorXd predict_seasonal(const Eigen::VectorXd& t) const;  // absolute Fourier part

    double intercept() const { return trend_coef_.size() > 0 ? trend_coef_[0] : 0.0; }
    double slope() const { return trend_coef_.size() > 1 ? trend_coef_[1] : 0.0; }
    bool used_ridge_fallback() const { return used_ridge_; }
    const Eigen::VectorXd& seasonal_coefficients() const { return seasonal_coef_; }
    const Eigen::VectorXd& exog_coefficients() const { return exog_coef_; }

    // Max |D^T r| over design columns; near zero when the normal equations hold.
    double residual_orthogonality(const Eigen::VectorXd& t, const Eigen::VectorXd& y,
                                  const Eigen::MatrixXd& x_exog) const;

    nlohmann::json save() const;
    void load(const nlohmann::json& j);

private:
    Eigen::MatrixXd design(const Eigen::VectorXd& t, const Eigen::MatrixXd& x_exog) const;

    TrendSeasonConfig cfg_;
    std::vector<double> changepoints_;
    Eigen::VectorXd trend_coef_;     // [intercept, slope, hinge coefficients...]
    Eigen::VectorXd seasonal_coef_;  // [sin_1, cos_1, ..., sin_H, cos_H]
    Eigen::VectorXd exog_coef_;
    bool used_ridge_ = false;
    bool trained_ = false;
};

}  // namespace teleop::learn
