#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

namespace teleop::analysis {

// Standard regression metrics for one output dimension.
double mse(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);
double rmse(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);
double mae(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);
double r2(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred);

struct LipschitzEstimate {
    std::vector<double> per_output;  // scalar output distance per dimension
    double average = 0.0;            // mean of per_output
    double joint = 0.0;              // Euclidean output distance
    std::size_t pair_budget = 0;
    std::uint64_t seed = 0;
};

// Max output-distance / input-distance ratio over randomly sampled row pairs
// (with replacement). Predictions for the rows are supplied alongside the
// inputs, so any model can be analyzed. Pairs are drawn from one seeded
// stream, which makes the estimate monotone non-decreasing in the budget for
// a fixed seed.
LipschitzEstimate estimate_lipschitz_sampling(const Eigen::MatrixXd& inputs,
                                              const Eigen::MatrixXd& predictions,
                                              std::size_t pair_budget, std::uint64_t seed);

using VectorModel = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct PowerIterationResult {
    double lipschitz = 0.0;
    bool converged = false;
    int iterations = 0;
};

// Largest local singular value of the Jacobian at x0: power iteration on
// J^T J with J formed by central finite differences (relative step
// epsilon_rel). Equals the global constant for linear models.
PowerIterationResult estimate_lipschitz_power(const VectorModel& model, const Eigen::VectorXd& x0,
                                              int max_iters = 500, double epsilon_rel = 1e-5);

// Percent of rows whose prediction norm does not exceed the input-row norm,
// both taken in the same (normalized) space.
double passivity_ratio(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& predictions);

struct IntegralPassivity {
    double value = 0.0;  // trapezoidal integral of u(t)*y(t)
    bool passive = false;
};

IntegralPassivity integral_passivity_check(const std::vector<double>& u,
                                           const std::vector<double>& y, double dt,
                                           double tol = 1e-9);

// ---------------------------------------------------------------------------
// Report documents

struct ModelMetrics {
    std::string model;
    double rmse_n1 = 0.0, rmse_m2 = 0.0;
    double mae_n1 = 0.0, mae_m2 = 0.0;
    double mse_n1 = 0.0, mse_m2 = 0.0;
    double r2_n1 = 0.0, r2_m2 = 0.0;
    double train_seconds = 0.0;
    double inference_seconds = 0.0;
};

struct MetricsReport {
    std::vector<ModelMetrics> rows;
};

struct StabilityReport {
    std::vector<double> lipschitz_per_output;
    double lipschitz_avg = 0.0;
    double lipschitz_joint = 0.0;
    double power_lipschitz = 0.0;
    bool power_converged = false;
    double passivity_ratio_percent = 0.0;
    std::size_t n_samples = 0;
    std::size_t pair_budget = 0;
    std::uint64_t seed = 0;
};

ModelMetrics evaluate_model(const std::string& name, const Eigen::MatrixXd& y_true,
                            const Eigen::MatrixXd& y_pred);

nlohmann::json report_to_json(const MetricsReport& metrics,
                              const std::optional<StabilityReport>& stability);
MetricsReport metrics_from_json(const nlohmann::json& j);
std::optional<StabilityReport> stability_from_json(const nlohmann::json& j);

// Human-readable CSV tables.
void write_metrics_csv(const MetricsReport& report, const std::string& path);
void write_stability_csv(const StabilityReport& report, const std::string& path);

}  // namespace teleop::analysis
