#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "teleop/channel_sim.hpp"

namespace teleop::data {

// One supervised timestep: disturbed channel inputs paired with the ideal
// responses of the same operator input.
struct DataRow {
    int scenario_id = 0;
    double t = 0.0;
    double m1_d = 0.0, n2_d = 0.0, td = 0.0;      // features
    double n1_ideal = 0.0, m2_ideal = 0.0;        // targets
};

using DataTable = std::vector<DataRow>;

constexpr std::size_t kNumFeatures = 3;
constexpr std::size_t kNumTargets = 2;

// Pair a disturbed run with its ideal twin (same operator input and length).
DataTable pair_scenarios(const sim::ScenarioResult& ideal, const sim::ScenarioResult& disturbed,
                         int scenario_id);

struct ColumnStats {
    double mean = 0.0;
    double std = 1.0;
};

// Population statistics (divide by N). Throws on < 2 values or zero variance.
ColumnStats fit_column(const std::vector<double>& values);

struct NormStats {
    std::array<ColumnStats, kNumFeatures> features;
    std::array<ColumnStats, kNumTargets> targets;
};

// Z-score statistics from training rows only.
NormStats normalize_fit(const DataTable& train_rows);
DataTable normalize_apply(const DataTable& rows, const NormStats& stats);
// Inverse transform for predicted targets (n1, m2) pairs.
std::array<double, kNumTargets> denormalize_targets(const std::array<double, kNumTargets>& y,
                                                    const NormStats& stats);

// Clip feature/target values beyond mean +- k*std to the bound. No rows are
// dropped, preserving time continuity.
DataTable clean_outliers(const DataTable& rows, double k_sigma = 5.0);

// Sliding windows (stride 1) over normalized rows, never crossing scenario
// boundaries; the target is the final timestep of each window.
struct WindowedDataset {
    std::size_t window_len = 100;
    std::vector<std::vector<double>> X;           // window_len x kNumFeatures, row-major
    std::vector<std::array<double, kNumTargets>> y;
    std::vector<double> t;                        // window-end time on the concatenated timeline
    std::vector<int> scenario_id;

    std::size_t size() const { return X.size(); }
};

WindowedDataset make_windows(const DataTable& rows, std::size_t window_len = 100);

struct FoldRange {
    std::size_t begin = 0;
    std::size_t end = 0;
};

// Chronological 85/15 split with K contiguous folds over the training range.
struct SplitIndices {
    std::size_t train_begin = 0;
    std::size_t train_end = 0;  // == test_begin
    std::size_t test_end = 0;
    std::vector<FoldRange> folds;
    double inner_val_fraction = 0.10;

    std::size_t train_size() const { return train_end - train_begin; }
    std::size_t test_size() const { return test_end - train_end; }
};

SplitIndices make_splits(std::size_t n_windows, double train_frac = 0.85, std::size_t k_folds = 5);

// CSV with header scenario_id,t,M1_d,N2_d,Td,N1_ideal,M2_ideal.
void write_dataset_csv(const DataTable& rows, const std::string& path);
DataTable read_dataset_csv(const std::string& path);

void write_norm_stats(const NormStats& stats, const std::string& path);
NormStats read_norm_stats(const std::string& path);

}  // namespace teleop::data
