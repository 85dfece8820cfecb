#include "teleop/ensemble.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>

#include "teleop/common.hpp"
#include "teleop/rng.hpp"

#include "json.hpp"

namespace teleop::ensemble {

namespace fs = std::filesystem;

namespace {

learn::WindowData training_complement(const learn::WindowData& data, const data::FoldRange& fold) {
    std::vector<std::size_t> idx;
    idx.reserve(data.size() - (fold.end - fold.begin));
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (i < fold.begin || i >= fold.end) idx.push_back(i);
    }
    return data.take(idx);
}

double now_seconds() {
    return std::chrono::duration<double>(
               std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

}  // namespace

MetaFeatureResult generate_meta_features(const learn::WindowData& train_data,
                                         const std::vector<learn::LearnerFactory>& factories,
                                         const std::vector<std::string>& kinds,
                                         const std::vector<data::FoldRange>& folds,
                                         std::uint64_t seed) {
    const std::size_t n = train_data.size();
    const std::size_t m = factories.size();
    if (folds.size() < 2) throw ConfigError("meta-feature generation needs at least 2 folds");
    if (kinds.size() != m) throw ConfigError("learner kinds and factories are misaligned");

    MetaFeatureResult result;
    result.features.values.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(2 * m));
    for (const std::string& kind : kinds) {
        result.features.layout.push_back(kind + ".N1");
        result.features.layout.push_back(kind + ".M2");
    }

    std::vector<int> fill_count(n, 0);
    for (std::size_t j = 0; j < m; ++j) {
        for (std::size_t k = 0; k < folds.size(); ++k) {
            const data::FoldRange& fold = folds[k];
            if (fold.end <= fold.begin) throw DataError("empty cross-validation fold");
            const learn::WindowData fit_part = training_complement(train_data, fold);
            if (fit_part.size() < 2) {
                throw DataError("fold " + std::to_string(k) +
                                " leaves too little data to train a learner");
            }
            auto learner = factories[j]();
            learner->fit(fit_part, seed + 104729ull * j + 7919ull * k);

            const learn::WindowData held_out = train_data.slice(fold.begin, fold.end);
            const Eigen::MatrixXd pred = learner->predict(held_out);
            result.features.values.block(static_cast<Eigen::Index>(fold.begin),
                                         static_cast<Eigen::Index>(2 * j),
                                         static_cast<Eigen::Index>(fold.end - fold.begin), 2) = pred;
            for (std::size_t i = fold.begin; i < fold.end; ++i) {
                if (j == 0) ++fill_count[i];
            }
        }
        // Full-train retrain (the deployed version of this learner).
        auto full = factories[j]();
        const double t0 = now_seconds();
        full->fit(train_data, seed + 104729ull * j + 999331ull);
        result.fit_seconds.push_back(now_seconds() - t0);
        result.retrained.push_back(std::move(full));
    }

    for (std::size_t i = 0; i < n; ++i) {
        if (fill_count[i] != 1) {
            throw DataError("meta-feature row " + std::to_string(i) +
                            " filled " + std::to_string(fill_count[i]) +
                            " times; folds must partition the training range");
        }
    }
    return result;
}

learn::MultiGbt train_meta(const MetaFeatures& meta, const Eigen::MatrixXd& y_train,
                           const learn::GbtConfig& cfg, std::uint64_t seed) {
    if (meta.values.rows() != y_train.rows())
        throw DataError("meta-features and training targets are misaligned");
    learn::MultiGbt model;
    model.fit(meta.values, y_train, cfg, seed);
    return model;
}

Eigen::MatrixXd base_meta_features(const StackedModel& model, const learn::WindowData& data) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(data.size()),
                        static_cast<Eigen::Index>(2 * model.bases.size()));
    for (std::size_t j = 0; j < model.bases.size(); ++j) {
        out.middleCols(static_cast<Eigen::Index>(2 * j), 2) = model.bases[j]->predict(data);
    }
    return out;
}

Eigen::MatrixXd meta_predict(const StackedModel& model, const Eigen::MatrixXd& meta_features,
                             const std::vector<std::string>& layout) {
    if (layout != model.layout) {
        std::string got, want;
        for (const auto& c : layout) got += c + ",";
        for (const auto& c : model.layout) want += c + ",";
        throw DataError("meta-feature column layout mismatch: got [" + got + "] want [" + want +
                        "]");
    }
    if (meta_features.cols() != static_cast<Eigen::Index>(model.layout.size()))
        throw DataError("meta-feature width does not match the model layout");
    return model.meta.predict(meta_features);
}

Eigen::MatrixXd stacked_predict(const StackedModel& model, const learn::WindowData& data) {
    if (model.bases.empty()) throw DataError("stacked model has no base learners");
    for (const auto& base : model.bases) {
        if (!base->trained()) throw DataError("stacked model contains an untrained base learner");
    }
    return meta_predict(model, base_meta_features(model, data), model.layout);
}

void save_stacked_model(const StackedModel& model, const std::string& dir) {
    const fs::path target(dir);
    const fs::path tmp = target.string() + ".tmp";
    fs::remove_all(tmp);
    fs::create_directories(tmp);

    nlohmann::json manifest;
    manifest["format_version"] = StackedModel::kFormatVersion;
    manifest["layout"] = model.layout;
    nlohmann::json base_files = nlohmann::json::array();
    for (std::size_t j = 0; j < model.bases.size(); ++j) {
        const std::string name = "base_" + std::to_string(j) + ".json";
        std::ofstream out(tmp / name);
        out << model.bases[j]->save().dump(1) << "\n";
        base_files.push_back({{"file", name}, {"kind", model.bases[j]->kind()}});
    }
    manifest["bases"] = base_files;
    {
        std::ofstream out(tmp / "meta.json");
        out << model.meta.save().dump(1) << "\n";
    }
    data::write_norm_stats(model.stats, (tmp / "norm_stats.json").string());
    {
        std::ofstream out(tmp / "manifest.json");
        out << manifest.dump(2) << "\n";
    }

    fs::remove_all(target);
    fs::rename(tmp, target);
}

StackedModel load_stacked_model(const std::string& dir) {
    const fs::path root(dir);
    if (!fs::exists(root / "manifest.json"))
        throw DataError("model archive not found at " + dir);

    nlohmann::json manifest;
    {
        std::ifstream in(root / "manifest.json");
        in >> manifest;
    }
    const int version = manifest.at("format_version").get<int>();
    if (version != StackedModel::kFormatVersion) {
        throw DataError("model archive format version " + std::to_string(version) +
                        " does not match supported version " +
                        std::to_string(StackedModel::kFormatVersion));
    }

    StackedModel model;
    model.layout = manifest.at("layout").get<std::vector<std::string>>();
    for (const auto& base : manifest.at("bases")) {
        nlohmann::json j;
        std::ifstream in(root / base.at("file").get<std::string>());
        if (!in) throw DataError("missing base learner file in archive " + dir);
        in >> j;
        model.bases.push_back(learn::load_learner(j));
    }
    {
        nlohmann::json j;
        std::ifstream in(root / "meta.json");
        if (!in) throw DataError("missing meta model in archive " + dir);
        in >> j;
        model.meta.load(j);
    }
    model.stats = data::read_norm_stats((root / "norm_stats.json").string());
    return model;
}

// ---------------------------------------------------------------------------
// Random search

TuneResult tune_random(const std::vector<ParamRange>& space, int budget, std::uint64_t seed,
                       const learn::WindowData& train_data, double val_fraction,
                       const TuneObjective& objective) {
    if (space.empty()) throw ConfigError("tune_random: empty search space");
    if (budget < 1) throw ConfigError("tune_random: budget must be at least 1");

    const auto n = train_data.size();
    const auto n_val = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                    val_fraction * static_cast<double>(n)));
    if (n_val >= n) throw DataError("tune_random: not enough data for a validation split");
    const learn::WindowData train = train_data.slice(0, n - n_val);
    const learn::WindowData val = train_data.slice(n - n_val, n);

    Rng rng(seed);
    TuneResult result;
    for (int trial = 0; trial < budget; ++trial) {
        TuneTrial t;
        for (const ParamRange& p : space) {
            double v;
            if (p.log_scale) {
                v = std::exp(rng.uniform(std::log(p.lo), std::log(p.hi)));
            } else {
                v = rng.uniform(p.lo, p.hi);
            }
            if (p.integer) v = std::round(v);
            t.params[p.name] = v;
        }
        t.val_rmse = objective(t.params, train, val, seed + static_cast<std::uint64_t>(trial));
        result.trials.push_back(std::move(t));
    }

    result.best_index = 0;
    for (std::size_t i = 1; i < result.trials.size(); ++i) {
        if (result.trials[i].val_rmse < result.trials[result.best_index].val_rmse) {
            result.best_index = i;
        }
    }
    return result;
}

double recurrent_net_objective(const std::map<std::string, double>& params,
                               const learn::WindowData& train, const learn::WindowData& val,
                               std::uint64_t seed) {
    const auto units = static_cast<Eigen::Index>(params.count("units") ? params.at("units") : 16);
    const double lr = params.count("lr") ? params.at("lr") : 1e-3;
    const double dropout = params.count("dropout") ? params.at("dropout") : 0.0;

    learn::LstmRegressor net(static_cast<Eigen::Index>(train.n_features()), units, dropout,
                             train.y.cols());
    net.init_weights(seed);
    learn::TrainConfig cfg;
    cfg.epochs = 5;
    cfg.patience = 5;
    cfg.inner_val_fraction = 0.0;
    cfg.adam.lr = lr;
    learn::train_network(net, train, cfg, seed + 1);

    const Eigen::MatrixXd pred = net.predict(val.X);
    return std::sqrt((pred - val.y).array().square().mean());
}

}  // namespace teleop::ensemble
