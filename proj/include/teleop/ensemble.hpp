#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "teleop/dataset.hpp"
#include "teleop/learners/base_learner.hpp"
#include "teleop/learners/gbt.hpp"
#include "teleop/learners/hybrids.hpp"

namespace teleop::ensemble {

// Out-of-fold base-learner predictions. Column layout is fixed:
// for each learner j (in bundle order) two columns "<kind>.N1", "<kind>.M2";
// row i was produced by a learner never trained on row i.
struct MetaFeatures {
    Eigen::MatrixXd values;
    std::vector<std::string> layout;
};

struct MetaFeatureResult {
    MetaFeatures features;
    std::vector<std::unique_ptr<learn::BaseLearner>> retrained;  // full-train versions
    std::vector<double> fit_seconds;                             // per learner, full retrain
};

// K-fold out-of-fold meta-feature generation: for each learner and fold,
// train on the other folds and predict the held-out fold; afterwards retrain
// each learner on the full training data.
MetaFeatureResult generate_meta_features(const learn::WindowData& train_data,
                                         const std::vector<learn::LearnerFactory>& factories,
                                         const std::vector<std::string>& kinds,
                                         const std::vector<data::FoldRange>& folds,
                                         std::uint64_t seed);

learn::MultiGbt train_meta(const MetaFeatures& meta, const Eigen::MatrixXd& y_train,
                           const learn::GbtConfig& cfg, std::uint64_t seed);

struct StackedModel {
    static constexpr int kFormatVersion = 1;

    std::vector<std::unique_ptr<learn::BaseLearner>> bases;
    learn::MultiGbt meta;
    std::vector<std::string> layout;
    data::NormStats stats;
};

// Base predictions assembled in the model's column layout.
Eigen::MatrixXd base_meta_features(const StackedModel& model, const learn::WindowData& data);

// Meta prediction from an externally assembled meta-feature matrix; the
// caller's layout must match the model's (the layout is part of the model).
Eigen::MatrixXd meta_predict(const StackedModel& model, const Eigen::MatrixXd& meta_features,
                             const std::vector<std::string>& layout);

Eigen::MatrixXd stacked_predict(const StackedModel& model, const learn::WindowData& data);

// Directory archive: manifest + one artifact per base learner + the meta
// model + normalization stats. Written to a temporary directory and renamed,
// so an aborted save leaves no partial archive.
void save_stacked_model(const StackedModel& model, const std::string& dir);
StackedModel load_stacked_model(const std::string& dir);

// ---------------------------------------------------------------------------
// Seeded random-search tuner.

struct ParamRange {
    std::string name;
    double lo = 0.0;
    double hi = 1.0;
    bool integer = false;
    bool log_scale = false;
};

struct TuneTrial {
    std::map<std::string, double> params;
    double val_rmse = 0.0;
};

struct TuneResult {
    std::vector<TuneTrial> trials;
    std::size_t best_index = 0;

    const TuneTrial& best() const { return trials[best_index]; }
};

using TuneObjective = std::function<double(const std::map<std::string, double>& params,
                                           const learn::WindowData& train,
                                           const learn::WindowData& val, std::uint64_t seed)>;

// Uniform sampling over the declared ranges; each trial evaluates the
// objective (validation RMSE) on a chronological train/validation split.
TuneResult tune_random(const std::vector<ParamRange>& space, int budget, std::uint64_t seed,
                       const learn::WindowData& train_data, double val_fraction,
                       const TuneObjective& objective);

// Default objective: trains a small recurrent regressor with the sampled
// "units", "lr", and "dropout" and returns its validation RMSE.
double recurrent_net_objective(const std::map<std::string, double>& params,
                               const learn::WindowData& train, const learn::WindowData& val,
                               std::uint64_t seed);

}  // namespace teleop::ensemble
