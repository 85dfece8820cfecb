#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "teleop/rng.hpp"

#include "json.hpp"

namespace teleop::learn {

// One trainable tensor with its gradient and optimizer state.
struct ParamBlock {
    std::string name;
    Eigen::MatrixXd value;
    Eigen::MatrixXd grad;
    Eigen::MatrixXd adam_m;
    Eigen::MatrixXd adam_v;

    ParamBlock() = default;
    ParamBlock(std::string n, Eigen::Index rows, Eigen::Index cols)
        : name(std::move(n)),
          value(Eigen::MatrixXd::Zero(rows, cols)),
          grad(Eigen::MatrixXd::Zero(rows, cols)),
          adam_m(Eigen::MatrixXd::Zero(rows, cols)),
          adam_v(Eigen::MatrixXd::Zero(rows, cols)) {}

    void zero_grad() { grad.setZero(); }
};

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);

// Gated recurrent layer (input, forget, candidate, output gates; tanh cell).
// Weights are packed per gate: rows [0,U) input gate, [U,2U) forget,
// [2U,3U) candidate, [3U,4U) output.
class LstmLayer {
public:
    LstmLayer() = default;
    LstmLayer(Eigen::Index input_dim, Eigen::Index units);

    void init_weights(Rng& rng, double scale);

    // Processes a batch of equally long windows; returns the final hidden
    // state (batch x units) and caches everything needed for backward().
    // `inputs[t]` is the batch-major slice at timestep t (batch x input_dim).
    const Eigen::MatrixXd& forward(const std::vector<Eigen::MatrixXd>& inputs);

    // Full hidden-state sequence of a single window (T x units). Does not
    // cache for backward.
    Eigen::MatrixXd hidden_sequence(const Eigen::MatrixXd& window) const;

    // Cache-free batched inference; safe for concurrent callers.
    Eigen::MatrixXd infer(const std::vector<Eigen::MatrixXd>& inputs) const;

    // dLast: gradient of the loss w.r.t. the final hidden state. Returns the
    // per-timestep input gradients when `input_grads` is non-null.
    void backward(const Eigen::MatrixXd& dLast, std::vector<Eigen::MatrixXd>* input_grads = nullptr);

    std::vector<ParamBlock*> params() { return {&W_, &R_, &b_}; }
    Eigen::Index units() const { return units_; }
    Eigen::Index input_dim() const { return input_dim_; }
    std::size_t param_count() const {
        return static_cast<std::size_t>(W_.value.size() + R_.value.size() + b_.value.size());
    }

    nlohmann::json save() const;
    void load(const nlohmann::json& j);

private:
    Eigen::Index input_dim_ = 0;
    Eigen::Index units_ = 0;
    ParamBlock W_;  // 4U x input_dim
    ParamBlock R_;  // 4U x units
    ParamBlock b_;  // 4U x 1

    // Forward caches.
    std::vector<Eigen::MatrixXd> x_, i_, f_, g_, o_, c_, tanh_c_, h_;
    Eigen::MatrixXd h_last_;
};

class DenseLayer {
public:
    DenseLayer() = default;
    DenseLayer(Eigen::Index input_dim, Eigen::Index output_dim);

    void init_weights(Rng& rng, double scale);

    Eigen::MatrixXd forward(const Eigen::MatrixXd& input);
    Eigen::MatrixXd backward(const Eigen::MatrixXd& dOut);
    Eigen::MatrixXd apply(const Eigen::MatrixXd& input) const;  // cache-free

    std::vector<ParamBlock*> params() { return {&W_, &b_}; }
    ParamBlock& bias() { return b_; }

    nlohmann::json save() const;
    void load(const nlohmann::json& j);

private:
    ParamBlock W_;  // out x in
    ParamBlock b_;  // out x 1
    Eigen::MatrixXd input_cache_;
};

// Valid (no padding) 1-D convolution over a window (T x channels) followed
// by ReLU: output (T - kernel + 1) x filters.
class Conv1DLayer {
public:
    Conv1DLayer() = default;
    Conv1DLayer(Eigen::Index channels, Eigen::Index filters, Eigen::Index kernel);

    void init_weights(Rng& rng, double scale);

    std::vector<Eigen::MatrixXd> forward(const std::vector<Eigen::MatrixXd>& windows,
                                         bool apply_relu = true);
    std::vector<Eigen::MatrixXd> backward(const std::vector<Eigen::MatrixXd>& dOut);
    Eigen::MatrixXd apply(const Eigen::MatrixXd& window, bool relu = true) const;  // cache-free

    std::vector<ParamBlock*> params() { return {&W_, &b_}; }
    Eigen::Index kernel() const { return kernel_; }

    nlohmann::json save() const;
    void load(const nlohmann::json& j);

private:
    Eigen::Index channels_ = 0, filters_ = 0, kernel_ = 0;
    ParamBlock W_;  // filters x (kernel * channels)
    ParamBlock b_;  // filters x 1
    std::vector<Eigen::MatrixXd> cols_;     // im2col caches
    std::vector<Eigen::MatrixXd> pre_act_;  // pre-ReLU outputs
    bool relu_ = true;
};

// Non-overlapping max pooling along time; output length floor(T / size).
class MaxPool1D {
public:
    explicit MaxPool1D(Eigen::Index size = 2) : size_(size) {}

    std::vector<Eigen::MatrixXd> forward(const std::vector<Eigen::MatrixXd>& seqs);
    std::vector<Eigen::MatrixXd> backward(const std::vector<Eigen::MatrixXd>& dOut);
    static Eigen::MatrixXd apply(const Eigen::MatrixXd& seq, Eigen::Index size);  // cache-free

private:
    Eigen::Index size_ = 2;
    std::vector<Eigen::MatrixXi> argmax_;
    std::vector<Eigen::Index> in_len_;
    Eigen::Index channels_ = 0;
};

struct AdamConfig {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

class Adam {
public:
    explicit Adam(AdamConfig cfg = {}) : cfg_(cfg) {}
    void step(const std::vector<ParamBlock*>& params);
    void reset() { t_ = 0; }

private:
    AdamConfig cfg_;
    long t_ = 0;
};

}  // namespace teleop::learn
