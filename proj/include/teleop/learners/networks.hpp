#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <vector>

#include "teleop/learners/nn_core.hpp"
#include "teleop/learners/window_data.hpp"

namespace teleop::learn {

struct TrainConfig {
    int epochs = 30;
    int batch_size = 64;
    int patience = 5;
    double inner_val_fraction = 0.10;
    AdamConfig adam{};
};

// Common surface for the gradient-trained sequence models.
class SequenceNet {
public:
    virtual ~SequenceNet() = default;
    virtual Eigen::MatrixXd forward(const std::vector<const Eigen::MatrixXd*>& windows,
                                    bool training, Rng* dropout_rng) = 0;
    virtual void backward(const Eigen::MatrixXd& dOut) = 0;
    // Cache-free inference, safe for concurrent callers.
    virtual Eigen::MatrixXd infer(const std::vector<const Eigen::MatrixXd*>& windows) const = 0;
    virtual std::vector<ParamBlock*> params() = 0;
    virtual Eigen::Index output_dim() const = 0;
    virtual void init_weights(std::uint64_t seed) = 0;

    void zero_grads();
    std::size_t param_count();
    Eigen::MatrixXd predict(const std::vector<Eigen::MatrixXd>& windows) const;
};

// Recurrent regressor: gated recurrent layer, dropout on the final hidden
// state, dense head.
class LstmRegressor : public SequenceNet {
public:
    LstmRegressor() = default;
    LstmRegressor(Eigen::Index input_dim, Eigen::Index units, double dropout,
                  Eigen::Index output_dim);

    Eigen::MatrixXd forward(const std::vector<const Eigen::MatrixXd*>& windows, bool training,
                            Rng* dropout_rng) override;
    void backward(const Eigen::MatrixXd& dOut) override;
    Eigen::MatrixXd infer(const std::vector<const Eigen::MatrixXd*>& windows) const override;
    std::vector<ParamBlock*> params() override;
    Eigen::Index output_dim() const override { return out_dim_; }
    void init_weights(std::uint64_t seed) override;

    LstmLayer& lstm() { return lstm_; }
    const LstmLayer& lstm() const { return lstm_; }
    DenseLayer& head() { return head_; }
    double dropout_rate() const { return dropout_; }

    nlohmann::json save() const;
    void load(const nlohmann::json& j);

private:
    Eigen::Index in_dim_ = 0, units_ = 0, out_dim_ = 0;
    double dropout_ = 0.0;
    LstmLayer lstm_;
    DenseLayer head_;
    Eigen::MatrixXd mask_;
    bool mask_active_ = false;
};

// Convolutional front end (valid conv + ReLU + max pool) feeding a recurrent
// layer and a dense head.
class ConvLstmNet : public SequenceNet {
public:
    ConvLstmNet() = default;
    ConvLstmNet(Eigen::Index input_dim, Eigen::Index filters, Eigen::Index kernel,
                Eigen::Index pool, Eigen::Index units, double dropout, Eigen::Index output_dim);

    Eigen::MatrixXd forward(const std::vector<const Eigen::MatrixXd*>& windows, bool training,
                            Rng* dropout_rng) override;
    void backward(const Eigen::MatrixXd& dOut) override;
    Eigen::MatrixXd infer(const std::vector<const Eigen::MatrixXd*>& windows) const override;
    std::vector<ParamBlock*> params() override;
    Eigen::Index output_dim() const override { return out_dim_; }
    void init_weights(std::uint64_t seed) override;

    Conv1DLayer& conv() { return conv_; }
    DenseLayer& head() { return head_; }

    nlohmann::json save() const;
    void load(const nlohmann::json& j);

private:
    Eigen::Index in_dim_ = 0, filters_ = 0, kernel_ = 0, pool_size_ = 0, units_ = 0,
                 out_dim_ = 0;
    double dropout_ = 0.0;
    Conv1DLayer conv_;
    MaxPool1D pool_{2};
    LstmLayer lstm_;
    DenseLayer head_;
    Eigen::MatrixXd mask_;
    bool mask_active_ = false;
    std::size_t batch_ = 0;
};

struct TrainResult {
    int epochs_run = 0;
    double best_val_loss = 0.0;
    std::vector<double> train_loss;  // per epoch
};

// Adaptive-moment minibatch training on squared error with early stopping on
// a chronological inner validation tail. Deterministic for a fixed seed.
TrainResult train_network(SequenceNet& net, const WindowData& data, const TrainConfig& cfg,
                          std::uint64_t seed);

double mse_loss(const Eigen::MatrixXd& pred, const Eigen::MatrixXd& truth);

}  // namespace teleop::learn
