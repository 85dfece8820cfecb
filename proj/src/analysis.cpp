#include "teleop/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "teleop/common.hpp"
#include "teleop/rng.hpp"

namespace teleop::analysis {

namespace {

void check_lengths(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
    if (y_true.size() != y_pred.size()) throw DataError("metric inputs have different lengths");
    if (y_true.size() < 2) throw DataError("metrics need at least 2 samples");
}

}  // namespace

double mse(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
    check_lengths(y_true, y_pred);
    return (y_true - y_pred).array().square().mean();
}

double rmse(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
    return std::sqrt(mse(y_true, y_pred));
}

double mae(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
    check_lengths(y_true, y_pred);
    return (y_true - y_pred).array().abs().mean();
}

double r2(const Eigen::VectorXd& y_true, const Eigen::VectorXd& y_pred) {
    check_lengths(y_true, y_pred);
    const double mean = y_true.mean();
    const double ss_tot = (y_true.array() - mean).square().sum();
    if (ss_tot <= 0.0) throw DataError("R^2 is undefined for zero-variance targets");
    const double ss_res = (y_true - y_pred).array().square().sum();
    return 1.0 - ss_res / ss_tot;
}

LipschitzEstimate estimate_lipschitz_sampling(const Eigen::MatrixXd& inputs,
                                              const Eigen::MatrixXd& predictions,
                                              std::size_t pair_budget, std::uint64_t seed) {
    const Eigen::Index n = inputs.rows();
    if (n < 2) throw DataError("lipschitz sampling needs at least 2 rows");
    if (predictions.rows() != n) throw DataError("inputs and predictions are misaligned");
    if (pair_budget < 1) throw ConfigError("pair budget must be at least 1");

    const Eigen::Index d_out = predictions.cols();
    LipschitzEstimate est;
    est.per_output.assign(static_cast<std::size_t>(d_out), 0.0);
    est.pair_budget = pair_budget;
    est.seed = seed;

    Rng rng(seed);
    bool any_distinct = false;
    for (std::size_t p = 0; p < pair_budget; ++p) {
        const auto i = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(n)));
        const auto j = static_cast<Eigen::Index>(rng.uniform_index(static_cast<std::size_t>(n)));
        const double d_in = (inputs.row(i) - inputs.row(j)).norm();
        if (d_in <= 0.0) continue;
        any_distinct = true;
        est.joint = std::max(est.joint, (predictions.row(i) - predictions.row(j)).norm() / d_in);
        for (Eigen::Index d = 0; d < d_out; ++d) {
            est.per_output[static_cast<std::size_t>(d)] =
                std::max(est.per_output[static_cast<std::size_t>(d)],
                         std::abs(predictions(i, d) - predictions(j, d)) / d_in);
        }
    }
    if (!any_distinct) throw DataError("lipschitz sampling: all sampled rows were identical");

    double sum = 0.0;
    for (double v : est.per_output) sum += v;
    est.average = sum / static_cast<double>(est.per_output.size());
    return est;
}

PowerIterationResult estimate_lipschitz_power(const VectorModel& model, const Eigen::VectorXd& x0,
                                              int max_iters, double epsilon_rel) {
    const Eigen::Index n = x0.size();
    const Eigen::VectorXd f0 = model(x0);
    if (!f0.allFinite()) throw DataError("model is not finite at the expansion point");
    const Eigen::Index m = f0.size();

    Eigen::MatrixXd jac(m, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double h = epsilon_rel * std::max(1.0, std::abs(x0[i]));
        Eigen::VectorXd xp = x0, xm = x0;
        xp[i] += h;
        xm[i] -= h;
        jac.col(i) = (model(xp) - model(xm)) / (2.0 * h);
    }

    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    Rng rng(0x5eedULL);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.uniform(-1.0, 1.0);
    if (v.norm() == 0.0) v.setOnes();
    v.normalize();

    PowerIterationResult result;
    double lambda = 0.0;
    for (int it = 0; it < max_iters; ++it) {
        result.iterations = it + 1;
        const Eigen::VectorXd w = jtj * v;
        const double new_lambda = v.dot(w);
        const double wn = w.norm();
        if (wn == 0.0) {
            result.lipschitz = 0.0;
            result.converged = true;
            return result;
        }
        v = w / wn;
        if (std::abs(new_lambda - lambda) <= 1e-12 * std::max(1.0, std::abs(new_lambda))) {
            lambda = new_lambda;
            result.converged = true;
            break;
        }
        lambda = new_lambda;
    }
    result.lipschitz = std::sqrt(std::max(lambda, 0.0));
    return result;
}

double passivity_ratio(const Eigen::MatrixXd& inputs, const Eigen::MatrixXd& predictions) {
    if (inputs.rows() == 0) throw DataError("passivity ratio needs at least one row");
    if (inputs.rows() != predictions.rows())
        throw DataError("inputs and predictions are misaligned");
    Eigen::Index passive = 0;
    for (Eigen::Index i = 0; i < inputs.rows(); ++i) {
        if (predictions.row(i).norm() <= inputs.row(i).norm()) ++passive;
    }
    return 100.0 * static_cast<double>(passive) / static_cast<double>(inputs.rows());
}

IntegralPassivity integral_passivity_check(const std::vector<double>& u,
                                           const std::vector<double>& y, double dt, double tol) {
    if (u.size() != y.size()) throw DataError("integral passivity: series lengths differ");
    IntegralPassivity out;
    for (std::size_t k = 0; k + 1 < u.size(); ++k) {
        out.value += 0.5 * dt * (u[k] * y[k] + u[k + 1] * y[k + 1]);
    }
    out.passive = out.value >= -tol;
    return out;
}

ModelMetrics evaluate_model(const std::string& name, const Eigen::MatrixXd& y_true,
                            const Eigen::MatrixXd& y_pred) {
    ModelMetrics m;
    m.model = name;
    m.rmse_n1 = rmse(y_true.col(0), y_pred.col(0));
    m.rmse_m2 = rmse(y_true.col(1), y_pred.col(1));
    m.mae_n1 = mae(y_true.col(0), y_pred.col(0));
    m.mae_m2 = mae(y_true.col(1), y_pred.col(1));
    m.mse_n1 = mse(y_true.col(0), y_pred.col(0));
    m.mse_m2 = mse(y_true.col(1), y_pred.col(1));
    m.r2_n1 = r2(y_true.col(0), y_pred.col(0));
    m.r2_m2 = r2(y_true.col(1), y_pred.col(1));
    return m;
}

nlohmann::json report_to_json(const MetricsReport& metrics,
                              const std::optional<StabilityReport>& stability) {
    nlohmann::json j;
    j["metrics"] = nlohmann::json::array();
    for (const ModelMetrics& m : metrics.rows) {
        j["metrics"].push_back({{"model", m.model},
                                {"rmse_n1", m.rmse_n1},
                                {"rmse_m2", m.rmse_m2},
                                {"mae_n1", m.mae_n1},
                                {"mae_m2", m.mae_m2},
                                {"mse_n1", m.mse_n1},
                                {"mse_m2", m.mse_m2},
                                {"r2_n1", m.r2_n1},
                                {"r2_m2", m.r2_m2},
                                {"train_seconds", m.train_seconds},
                                {"inference_seconds", m.inference_seconds}});
    }
    if (stability) {
        j["stability"] = {{"lipschitz_per_output", stability->lipschitz_per_output},
                          {"lipschitz_avg", stability->lipschitz_avg},
                          {"lipschitz_joint", stability->lipschitz_joint},
                          {"power_lipschitz", stability->power_lipschitz},
                          {"power_converged", stability->power_converged},
                          {"passivity_ratio_percent", stability->passivity_ratio_percent},
                          {"n_samples", stability->n_samples},
                          {"pair_budget", stability->pair_budget},
                          {"seed", stability->seed}};
    }
    return j;
}

MetricsReport metrics_from_json(const nlohmann::json& j) {
    MetricsReport report;
    for (const auto& mj : j.at("metrics")) {
        ModelMetrics m;
        m.model = mj.at("model").get<std::string>();
        m.rmse_n1 = mj.at("rmse_n1").get<double>();
        m.rmse_m2 = mj.at("rmse_m2").get<double>();
        m.mae_n1 = mj.at("mae_n1").get<double>();
        m.mae_m2 = mj.at("mae_m2").get<double>();
        m.mse_n1 = mj.at("mse_n1").get<double>();
        m.mse_m2 = mj.at("mse_m2").get<double>();
        m.r2_n1 = mj.at("r2_n1").get<double>();
        m.r2_m2 = mj.at("r2_m2").get<double>();
        m.train_seconds = mj.at("train_seconds").get<double>();
        m.inference_seconds = mj.at("inference_seconds").get<double>();
        report.rows.push_back(std::move(m));
    }
    return report;
}

std::optional<StabilityReport> stability_from_json(const nlohmann::json& j) {
    if (!j.contains("stability")) return std::nullopt;
    const auto& sj = j.at("stability");
    StabilityReport s;
    s.lipschitz_per_output = sj.at("lipschitz_per_output").get<std::vector<double>>();
    s.lipschitz_avg = sj.at("lipschitz_avg").get<double>();
    s.lipschitz_joint = sj.at("lipschitz_joint").get<double>();
    s.power_lipschitz = sj.at("power_lipschitz").get<double>();
    s.power_converged = sj.at("power_converged").get<bool>();
    s.passivity_ratio_percent = sj.at("passivity_ratio_percent").get<double>();
    s.n_samples = sj.at("n_samples").get<std::size_t>();
    s.pair_budget = sj.at("pair_budget").get<std::size_t>();
    s.seed = sj.at("seed").get<std::uint64_t>();
    return s;
}

void write_metrics_csv(const MetricsReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << "model,rmse_n1,rmse_m2,mae_n1,mae_m2,mse_n1,mse_m2,r2_n1,r2_m2,"
           "train_seconds,inference_seconds\n";
    char buf[1024];
    for (const ModelMetrics& m : report.rows) {
        std::snprintf(buf, sizeof(buf),
                      "%s,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.6f,%.6f\n",
                      m.model.c_str(), m.rmse_n1, m.rmse_m2, m.mae_n1, m.mae_m2, m.mse_n1,
                      m.mse_m2, m.r2_n1, m.r2_m2, m.train_seconds, m.inference_seconds);
        out << buf;
    }
}

void write_stability_csv(const StabilityReport& report, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << "metric,value,note\n";
    char buf[512];
    std::snprintf(buf, sizeof(buf), "lipschitz_avg,%.17g,%s\n", report.lipschitz_avg,
                  report.lipschitz_avg < 1.0 ? "contractive (L < 1)" : "NOT contractive");
    out << buf;
    for (std::size_t d = 0; d < report.lipschitz_per_output.size(); ++d) {
        std::snprintf(buf, sizeof(buf), "lipschitz_output_%zu,%.17g,sampling estimator\n", d + 1,
                      report.lipschitz_per_output[d]);
        out << buf;
    }
    std::snprintf(buf, sizeof(buf), "lipschitz_joint,%.17g,Euclidean output distance\n",
                  report.lipschitz_joint);
    out << buf;
    std::snprintf(buf, sizeof(buf), "power_lipschitz,%.17g,%s\n", report.power_lipschitz,
                  report.power_converged ? "converged" : "not converged");
    out << buf;
    std::snprintf(buf, sizeof(buf), "passivity_ratio_percent,%.17g,non-expansive sample share\n",
                  report.passivity_ratio_percent);
    out << buf;
    std::snprintf(buf, sizeof(buf), "n_samples,%zu,\n", report.n_samples);
    out << buf;
    std::snprintf(buf, sizeof(buf), "pair_budget,%zu,\n", report.pair_budget);
    out << buf;
}

}  // namespace teleop::analysis
