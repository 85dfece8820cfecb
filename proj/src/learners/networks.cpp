#include "teleop/learners/networks.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "teleop/common.hpp"

namespace teleop::learn {

namespace {

// Batch-major timestep slices for the recurrent layer.
std::vector<Eigen::MatrixXd> timestep_slices(const std::vector<const Eigen::MatrixXd*>& windows) {
    const auto B = static_cast<Eigen::Index>(windows.size());
    const auto T = windows[0]->rows();
    const auto F = windows[0]->cols();
    std::vector<Eigen::MatrixXd> slices(static_cast<std::size_t>(T), Eigen::MatrixXd(B, F));
    for (Eigen::Index b = 0; b < B; ++b) {
        if (windows[static_cast<std::size_t>(b)]->rows() != T)
            throw DataError("all windows in a batch must have equal length");
        for (Eigen::Index t = 0; t < T; ++t)
            slices[static_cast<std::size_t>(t)].row(b) =
                windows[static_cast<std::size_t>(b)]->row(t);
    }
    return slices;
}

Eigen::MatrixXd dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
    const double keep = 1.0 - rate;
    Eigen::MatrixXd mask(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j)
            mask(i, j) = rng.uniform() < keep ? 1.0 / keep : 0.0;  // inverted scaling
    return mask;
}

}  // namespace

void SequenceNet::zero_grads() {
    for (ParamBlock* p : params()) p->zero_grad();
}

std::size_t SequenceNet::param_count() {
    std::size_t n = 0;
    for (ParamBlock* p : params()) n += static_cast<std::size_t>(p->value.size());
    return n;
}

Eigen::MatrixXd SequenceNet::predict(const std::vector<Eigen::MatrixXd>& windows) const {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(windows.size()), output_dim());
    const std::size_t chunk = 256;
    for (std::size_t begin = 0; begin < windows.size(); begin += chunk) {
        const std::size_t end = std::min(begin + chunk, windows.size());
        std::vector<const Eigen::MatrixXd*> batch;
        batch.reserve(end - begin);
        for (std::size_t i = begin; i < end; ++i) batch.push_back(&windows[i]);
        out.middleRows(static_cast<Eigen::Index>(begin), static_cast<Eigen::Index>(end - begin)) =
            infer(batch);
    }
    return out;
}

// ---------------------------------------------------------------------------
// LstmRegressor

LstmRegressor::LstmRegressor(Eigen::Index input_dim, Eigen::Index units, double dropout,
                             Eigen::Index output_dim)
    : in_dim_(input_dim),
      units_(units),
      out_dim_(output_dim),
      dropout_(dropout),
      lstm_(input_dim, units),
      head_(units, output_dim) {}

void LstmRegressor::init_weights(std::uint64_t seed) {
    Rng rng(seed);
    lstm_.init_weights(rng, 1.0 / std::sqrt(static_cast<double>(in_dim_ + units_)));
    head_.init_weights(rng, 1.0 / std::sqrt(static_cast<double>(units_)));
}

Eigen::MatrixXd LstmRegressor::forward(const std::vector<const Eigen::MatrixXd*>& windows,
                                       bool training, Rng* dropout_rng) {
    const auto slices = timestep_slices(windows);
    Eigen::MatrixXd h = lstm_.forward(slices);
    if (training && dropout_ > 0.0 && dropout_rng != nullptr) {
        mask_ = dropout_mask(h.rows(), h.cols(), dropout_, *dropout_rng);
        mask_active_ = true;
        h = h.cwiseProduct(mask_);
    } else {
        mask_active_ = false;
    }
    return head_.forward(h);
}

void LstmRegressor::backward(const Eigen::MatrixXd& dOut) {
    Eigen::MatrixXd dh = head_.backward(dOut);
    if (mask_active_) dh = dh.cwiseProduct(mask_);
    lstm_.backward(dh);
}

Eigen::MatrixXd LstmRegressor::infer(const std::vector<const Eigen::MatrixXd*>& windows) const {
    return head_.apply(lstm_.infer(timestep_slices(windows)));
}

std::vector<ParamBlock*> LstmRegressor::params() {
    auto out = lstm_.params();
    for (ParamBlock* p : head_.params()) out.push_back(p);
    return out;
}

nlohmann::json LstmRegressor::save() const {
    return {{"type", "lstm_regressor"}, {"input_dim", in_dim_},   {"units", units_},
            {"output_dim", out_dim_},   {"dropout", dropout_},    {"lstm", lstm_.save()},
            {"head", head_.save()}};
}

void LstmRegressor::load(const nlohmann::json& j) {
    in_dim_ = j.at("input_dim").get<Eigen::Index>();
    units_ = j.at("units").get<Eigen::Index>();
    out_dim_ = j.at("output_dim").get<Eigen::Index>();
    dropout_ = j.at("dropout").get<double>();
    lstm_.load(j.at("lstm"));
    head_.load(j.at("head"));
}

// ---------------------------------------------------------------------------
// ConvLstmNet

ConvLstmNet::ConvLstmNet(Eigen::Index input_dim, Eigen::Index filters, Eigen::Index kernel,
                         Eigen::Index pool, Eigen::Index units, double dropout,
                         Eigen::Index output_dim)
    : in_dim_(input_dim),
      filters_(filters),
      kernel_(kernel),
      pool_size_(pool),
      units_(units),
      out_dim_(output_dim),
      dropout_(dropout),
      conv_(input_dim, filters, kernel),
      pool_(pool),
      lstm_(filters, units),
      head_(units, output_dim) {}

void ConvLstmNet::init_weights(std::uint64_t seed) {
    Rng rng(seed);
    conv_.init_weights(rng, 1.0 / std::sqrt(static_cast<double>(kernel_ * in_dim_)));
    lstm_.init_weights(rng, 1.0 / std::sqrt(static_cast<double>(filters_ + units_)));
    head_.init_weights(rng, 1.0 / std::sqrt(static_cast<double>(units_)));
}

Eigen::MatrixXd ConvLstmNet::forward(const std::vector<const Eigen::MatrixXd*>& windows,
                                     bool training, Rng* dropout_rng) {
    batch_ = windows.size();
    std::vector<Eigen::MatrixXd> copies;
    copies.reserve(batch_);
    for (const Eigen::MatrixXd* w : windows) copies.push_back(*w);

    const auto feat = conv_.forward(copies, true);
    const auto pooled = pool_.forward(feat);

    std::vector<const Eigen::MatrixXd*> pooled_ptrs;
    pooled_ptrs.reserve(pooled.size());
    for (const auto& p : pooled) pooled_ptrs.push_back(&p);
    const auto slices = timestep_slices(pooled_ptrs);

    Eigen::MatrixXd h = lstm_.forward(slices);
    if (training && dropout_ > 0.0 && dropout_rng != nullptr) {
        mask_ = dropout_mask(h.rows(), h.cols(), dropout_, *dropout_rng);
        mask_active_ = true;
        h = h.cwiseProduct(mask_);
    } else {
        mask_active_ = false;
    }
    return head_.forward(h);
}

void ConvLstmNet::backward(const Eigen::MatrixXd& dOut) {
    Eigen::MatrixXd dh = head_.backward(dOut);
    if (mask_active_) dh = dh.cwiseProduct(mask_);

    std::vector<Eigen::MatrixXd> d_slices;
    lstm_.backward(dh, &d_slices);

    // Back to per-window sequences for the pooling/conv stages.
    const auto B = static_cast<Eigen::Index>(batch_);
    const auto L = static_cast<Eigen::Index>(d_slices.size());
    std::vector<Eigen::MatrixXd> d_pooled(batch_, Eigen::MatrixXd(L, filters_));
    for (Eigen::Index t = 0; t < L; ++t)
        for (Eigen::Index b = 0; b < B; ++b)
            d_pooled[static_cast<std::size_t>(b)].row(t) =
                d_slices[static_cast<std::size_t>(t)].row(b);

    conv_.backward(pool_.backward(d_pooled));
}

Eigen::MatrixXd ConvLstmNet::infer(const std::vector<const Eigen::MatrixXd*>& windows) const {
    std::vector<Eigen::MatrixXd> pooled;
    pooled.reserve(windows.size());
    for (const Eigen::MatrixXd* w : windows) {
        pooled.push_back(MaxPool1D::apply(conv_.apply(*w, true), pool_size_));
    }
    std::vector<const Eigen::MatrixXd*> ptrs;
    ptrs.reserve(pooled.size());
    for (const auto& p : pooled) ptrs.push_back(&p);
    return head_.apply(lstm_.infer(timestep_slices(ptrs)));
}

std::vector<ParamBlock*> ConvLstmNet::params() {
    auto out = conv_.params();
    for (ParamBlock* p : lstm_.params()) out.push_back(p);
    for (ParamBlock* p : head_.params()) out.push_back(p);
    return out;
}

nlohmann::json ConvLstmNet::save() const {
    return {{"type", "conv_lstm"},      {"input_dim", in_dim_}, {"filters", filters_},
            {"kernel", kernel_},        {"pool", pool_size_},   {"units", units_},
            {"output_dim", out_dim_},   {"dropout", dropout_},  {"conv", conv_.save()},
            {"lstm", lstm_.save()},     {"head", head_.save()}};
}

void ConvLstmNet::load(const nlohmann::json& j) {
    in_dim_ = j.at("input_dim").get<Eigen::Index>();
    filters_ = j.at("filters").get<Eigen::Index>();
    kernel_ = j.at("kernel").get<Eigen::Index>();
    pool_size_ = j.at("pool").get<Eigen::Index>();
    units_ = j.at("units").get<Eigen::Index>();
    out_dim_ = j.at("output_dim").get<Eigen::Index>();
    dropout_ = j.at("dropout").get<double>();
    pool_ = MaxPool1D(pool_size_);
    conv_.load(j.at("conv"));
    lstm_.load(j.at("lstm"));
    head_.load(j.at("head"));
}

// ---------------------------------------------------------------------------
// Trainer

double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth) {
    return (pred - truth).array().square().mean();
}

TrainResult train_network(SequenceNet& net, const WindowData& data, const TrainConfig& cfg,
                          std::uint64_t seed) {
    const std::size_t n = data.size();
    if (n == 0) throw DataError("train_network: no training windows");
    if (data.y.rows() != static_cast<Eigen::Index>(n))
        throw DataError("train_network: X and y are misaligned");

    const auto n_val = static_cast<std::size_t>(
        std::floor(cfg.inner_val_fraction * static_cast<double>(n)));
    const std::size_t n_core = n - n_val;

    Rng rng(seed);
    Adam adam(cfg.adam);
    TrainResult result;

    std::vector<std::size_t> order(n_core);
    std::iota(order.begin(), order.end(), 0);

    auto eval_loss = [&](std::size_t begin, std::size_t end) {
        double acc = 0.0;
        std::size_t count = 0;
        const std::size_t chunk = 256;
        for (std::size_t lo = begin; lo < end; lo += chunk) {
            const std::size_t hi = std::min(lo + chunk, end);
            std::vector<const Eigen::MatrixXd*> batch;
            for (std::size_t i = lo; i < hi; ++i) batch.push_back(&data.X[i]);
            const Eigen::MatrixXd pred = net.infer(batch);
            const Eigen::MatrixXd truth =
                data.y.middleRows(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo));
            acc += (pred - truth).array().square().sum();
            count += (hi - lo);
        }
        return acc / (static_cast<double>(count) * static_cast<double>(data.y.cols()));
    };

    double best_monitor = std::numeric_limits<double>::infinity();
    std::vector<Eigen::MatrixXd> best_params;
    auto snapshot = [&] {
        best_params.clear();
        for (ParamBlock* p : net.params()) best_params.push_back(p->value);
    };
    auto restore = [&] {
        if (best_params.empty()) return;
        std::size_t i = 0;
        for (ParamBlock* p : net.params()) p->value = best_params[i++];
    };
    snapshot();

    int wait = 0;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        std::size_t batches = 0;
        for (std::size_t lo = 0; lo < n_core; lo += static_cast<std::size_t>(cfg.batch_size)) {
            const std::size_t hi = std::min(lo + static_cast<std::size_t>(cfg.batch_size), n_core);
            std::vector<const Eigen::MatrixXd*> batch;
            Eigen::MatrixXd truth(static_cast<Eigen::Index>(hi - lo), data.y.cols());
            for (std::size_t i = lo; i < hi; ++i) {
                batch.push_back(&data.X[order[i]]);
                truth.row(static_cast<Eigen::Index>(i - lo)) =
                    data.y.row(static_cast<Eigen::Index>(order[i]));
            }
            net.zero_grads();
            const Eigen::MatrixXd pred = net.forward(batch, true, &rng);
            const double loss = mse_loss(pred, truth);
            if (!std::isfinite(loss)) {
                throw DataError("train_network: non-finite loss at epoch " +
                                std::to_string(epoch) + ", batch " + std::to_string(batches));
            }
            const Eigen::MatrixXd dOut =
                2.0 * (pred - truth) / static_cast<double>(pred.size());
            net.backward(dOut);
            adam.step(net.params());
            epoch_loss += loss;
            ++batches;
        }
        epoch_loss /= std::max<std::size_t>(batches, 1);
        result.train_loss.push_back(epoch_loss);
        result.epochs_run = epoch + 1;

        const double monitor = n_val > 0 ? eval_loss(n_core, n) : epoch_loss;
        if (monitor < best_monitor - 1e-12) {
            best_monitor = monitor;
            snapshot();
            wait = 0;
        } else if (++wait > cfg.patience) {
            break;
        }
        if (epoch_loss <= 1e-15) break;  // converged
    }
    restore();
    result.best_val_loss = best_monitor;
    return result;
}

}  // namespace teleop::learn
