#include "teleop/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "teleop/common.hpp"

#include "json.hpp"

namespace teleop::data {

DataTable pair_scenarios(const sim::ScenarioResult& ideal, const sim::ScenarioResult& disturbed,
                         int scenario_id) {
    if (ideal.t.size() != disturbed.t.size())
        throw DataError("ideal and disturbed scenario lengths differ");
    DataTable rows(ideal.t.size());
    for (std::size_t k = 0; k < rows.size(); ++k) {
        rows[k] = {scenario_id,        ideal.t[k],       disturbed.M1[k], disturbed.N2[k],
                   disturbed.Td[k],    ideal.N1[k],      ideal.M2[k]};
    }
    return rows;
}

ColumnStats fit_column(const std::vector<double>& values) {
    if (values.size() < 2) throw DataError("need at least 2 rows to fit statistics");
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0.0;
    for (double v : values) var += (v - mean) * (v - mean);
    var /= static_cast<double>(values.size());
    if (var <= 0.0) throw DataError("zero-variance column cannot be normalized");
    return {mean, std::sqrt(var)};
}

namespace {

std::array<std::vector<double>, 5> split_columns(const DataTable& rows) {
    std::array<std::vector<double>, 5> cols;
    for (auto& c : cols) c.reserve(rows.size());
    for (const DataRow& r : rows) {
        cols[0].push_back(r.m1_d);
        cols[1].push_back(r.n2_d);
        cols[2].push_back(r.td);
        cols[3].push_back(r.n1_ideal);
        cols[4].push_back(r.m2_ideal);
    }
    return cols;
}

}  // namespace

NormStats normalize_fit(const DataTable& train_rows) {
    const auto cols = split_columns(train_rows);
    NormStats s;
    for (std::size_t i = 0; i < kNumFeatures; ++i) s.features[i] = fit_column(cols[i]);
    for (std::size_t i = 0; i < kNumTargets; ++i) s.targets[i] = fit_column(cols[kNumFeatures + i]);
    return s;
}

DataTable normalize_apply(const DataTable& rows, const NormStats& s) {
    DataTable out = rows;
    for (DataRow& r : out) {
        r.m1_d = (r.m1_d - s.features[0].mean) / s.features[0].std;
        r.n2_d = (r.n2_d - s.features[1].mean) / s.features[1].std;
        r.td = (r.td - s.features[2].mean) / s.features[2].std;
        r.n1_ideal = (r.n1_ideal - s.targets[0].mean) / s.targets[0].std;
        r.m2_ideal = (r.m2_ideal - s.targets[1].mean) / s.targets[1].std;
    }
    return out;
}

std::array<double, kNumTargets> denormalize_targets(const std::array<double, kNumTargets>& y,
                                                    const NormStats& s) {
    return {y[0] * s.targets[0].std + s.targets[0].mean,
            y[1] * s.targets[1].std + s.targets[1].mean};
}

DataTable clean_outliers(const DataTable& rows, double k_sigma) {
    if (k_sigma <= 0.0) throw ConfigError("outlier sigma multiplier must be positive");
    if (rows.size() < 2) return rows;
    const auto cols = split_columns(rows);
    std::array<ColumnStats, 5> stats;
    for (std::size_t i = 0; i < 5; ++i) {
        try {
            stats[i] = fit_column(cols[i]);
        } catch (const DataError&) {
            stats[i] = {cols[i].empty() ? 0.0 : cols[i][0], 0.0};  // constant column: nothing to clip
        }
    }
    auto clip = [&](double v, const ColumnStats& s) {
        if (s.std == 0.0) return v;
        return std::clamp(v, s.mean - k_sigma * s.std, s.mean + k_sigma * s.std);
    };
    DataTable out = rows;
    for (DataRow& r : out) {
        r.m1_d = clip(r.m1_d, stats[0]);
        r.n2_d = clip(r.n2_d, stats[1]);
        r.td = clip(r.td, stats[2]);
        r.n1_ideal = clip(r.n1_ideal, stats[3]);
        r.m2_ideal = clip(r.m2_ideal, stats[4]);
    }
    return out;
}

WindowedDataset make_windows(const DataTable& rows, std::size_t window_len) {
    if (window_len == 0) throw ConfigError("window length must be positive");
    WindowedDataset ds;
    ds.window_len = window_len;

    // Scenario extents in row order.
    std::vector<std::pair<std::size_t, std::size_t>> spans;
    std::size_t begin = 0;
    for (std::size_t i = 1; i <= rows.size(); ++i) {
        if (i == rows.size() || rows[i].scenario_id != rows[begin].scenario_id) {
            spans.emplace_back(begin, i);
            begin = i;
        }
    }

    double time_offset = 0.0;
    for (const auto& [lo, hi] : spans) {
        const std::size_t len = hi - lo;
        if (len < window_len) {
            throw DataError("scenario " + std::to_string(rows[lo].scenario_id) + " has " +
                            std::to_string(len) + " rows, shorter than one window of " +
                            std::to_string(window_len));
        }
        for (std::size_t w = 0; w + window_len <= len; ++w) {
            std::vector<double> x;
            x.reserve(window_len * kNumFeatures);
            for (std::size_t j = 0; j < window_len; ++j) {
                const DataRow& r = rows[lo + w + j];
                x.push_back(r.m1_d);
                x.push_back(r.n2_d);
                x.push_back(r.td);
            }
            const DataRow& last = rows[lo + w + window_len - 1];
            ds.X.push_back(std::move(x));
            ds.y.push_back({last.n1_ideal, last.m2_ideal});
            ds.t.push_back(time_offset + last.t);
            ds.scenario_id.push_back(last.scenario_id);
        }
        time_offset += rows[hi - 1].t - rows[lo].t + (rows[lo + 1].t - rows[lo].t);
    }
    return ds;
}

SplitIndices make_splits(std::size_t n_windows, double train_frac, std::size_t k_folds) {
    if (k_folds < 2) throw ConfigError("need at least 2 folds");
    if (n_windows < k_folds) throw DataError("fewer windows than folds");
    SplitIndices s;
    s.train_begin = 0;
    s.train_end = static_cast<std::size_t>(std::floor(train_frac * static_cast<double>(n_windows)));
    s.test_end = n_windows;
    const std::size_t m = s.train_end;
    s.folds.reserve(k_folds);
    for (std::size_t i = 0; i < k_folds; ++i) {
        s.folds.push_back({i * m / k_folds, (i + 1) * m / k_folds});
    }
    return s;
}

void write_dataset_csv(const DataTable& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << "scenario_id,t,M1_d,N2_d,Td,N1_ideal,M2_ideal\n";
    char buf[512];
    for (const DataRow& r : rows) {
        std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.scenario_id,
                      r.t, r.m1_d, r.n2_d, r.td, r.n1_ideal, r.m2_ideal);
        out << buf;
    }
}

DataTable read_dataset_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    if (line != "scenario_id,t,M1_d,N2_d,Td,N1_ideal,M2_ideal")
        throw DataError(path + ": unexpected header '" + line + "'");
    DataTable rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        DataRow r;
        std::getline(ss, cell, ',');
        r.scenario_id = std::stoi(cell);
        double* fields[6] = {&r.t, &r.m1_d, &r.n2_d, &r.td, &r.n1_ideal, &r.m2_ideal};
        for (double* f : fields) {
            if (!std::getline(ss, cell, ',')) throw DataError(path + ": short row");
            *f = std::stod(cell);
        }
        rows.push_back(r);
    }
    return rows;
}

void write_norm_stats(const NormStats& stats, const std::string& path) {
    nlohmann::json j;
    const char* fnames[] = {"M1_d", "N2_d", "Td"};
    const char* tnames[] = {"N1_ideal", "M2_ideal"};
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
        j["features"][fnames[i]] = {{"mean", stats.features[i].mean},
                                    {"std", stats.features[i].std}};
    }
    for (std::size_t i = 0; i < kNumTargets; ++i) {
        j["targets"][tnames[i]] = {{"mean", stats.targets[i].mean},
                                   {"std", stats.targets[i].std}};
    }
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << j.dump(2) << "\n";
}

NormStats read_norm_stats(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    nlohmann::json j;
    in >> j;
    NormStats s;
    const char* fnames[] = {"M1_d", "N2_d", "Td"};
    const char* tnames[] = {"N1_ideal", "M2_ideal"};
    for (std::size_t i = 0; i < kNumFeatures; ++i) {
        s.features[i] = {j.at("features").at(fnames[i]).at("mean").get<double>(),
                         j.at("features").at(fnames[i]).at("std").get<double>()};
    }
    for (std::size_t i = 0; i < kNumTargets; ++i) {
        s.targets[i] = {j.at("targets").at(tnames[i]).at("mean").get<double>(),
                        j.at("targets").at(tnames[i]).at("std").get<double>()};
    }
    return s;
}

}  // namespace teleop::data
