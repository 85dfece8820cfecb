#include "teleop/learners/nn_core.hpp"

#include <cmath>

#include "teleop/common.hpp"

namespace teleop::learn {

namespace {

inline Eigen::ArrayXXd sigmoid(const Eigen::ArrayXXd& x) {
    return 1.0 / (1.0 + (-x).exp());
}

void fill_uniform(Eigen::MatrixXd& m, Rng& rng, double scale) {
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) m(i, j) = rng.uniform(-scale, scale);
}

}  // namespace

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    nlohmann::json j;
    j["rows"] = m.rows();
    j["cols"] = m.cols();
    std::vector<double> data;
    data.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) data.push_back(m(r, c));
    j["data"] = std::move(data);
    return j;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
    const auto rows = j.at("rows").get<Eigen::Index>();
    const auto cols = j.at("cols").get<Eigen::Index>();
    const auto data = j.at("data").get<std::vector<double>>();
    if (static_cast<Eigen::Index>(data.size()) != rows * cols)
        throw DataError("matrix payload size mismatch");
    Eigen::MatrixXd m(rows, cols);
    std::size_t k = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = data[k++];
    return m;
}

// ---------------------------------------------------------------------------
// LstmLayer

LstmLayer::LstmLayer(Eigen::Index input_dim, Eigen::Index units)
    : input_dim_(input_dim),
      units_(units),
      W_("lstm.W", 4 * units, input_dim),
      R_("lstm.R", 4 * units, units),
      b_("lstm.b", 4 * units, 1) {}

void LstmLayer::init_weights(Rng& rng, double scale) {
    fill_uniform(W_.value, rng, scale);
    fill_uniform(R_.value, rng, scale);
    b_.value.setZero();
    // Conventional forget-gate bias of 1 for gradient flow early in training.
    b_.value.block(units_, 0, units_, 1).setOnes();
}

const Eigen::MatrixXd& LstmLayer::forward(const std::vector<Eigen::MatrixXd>& inputs) {
    const auto T = inputs.size();
    const auto B = inputs.empty() ? 0 : inputs[0].rows();
    if (T == 0 || B == 0) throw DataError("lstm forward: empty input");
    const auto U = units_;

    x_ = inputs;
    i_.assign(T, {});
    f_.assign(T, {});
    g_.assign(T, {});
    o_.assign(T, {});
    c_.assign(T, {});
    tanh_c_.assign(T, {});
    h_.assign(T, {});

    Eigen::MatrixXd h_prev = Eigen::MatrixXd::Zero(B, U);
    Eigen::MatrixXd c_prev = Eigen::MatrixXd::Zero(B, U);
    for (std::size_t t = 0; t < T; ++t) {
        if (inputs[t].cols() != input_dim_ || inputs[t].rows() != B)
            throw DataError("lstm forward: input dimension mismatch");
        Eigen::MatrixXd pre = inputs[t] * W_.value.transpose() + h_prev * R_.value.transpose();
        pre.rowwise() += b_.value.col(0).transpose();

        i_[t] = sigmoid(pre.block(0, 0, B, U).array());
        f_[t] = sigmoid(pre.block(0, U, B, U).array());
        g_[t] = pre.block(0, 2 * U, B, U).array().tanh();
        o_[t] = sigmoid(pre.block(0, 3 * U, B, U).array());

        c_[t] = (f_[t].array() * c_prev.array() + i_[t].array() * g_[t].array()).matrix();
        tanh_c_[t] = c_[t].array().tanh().matrix();
        h_[t] = (o_[t].array() * tanh_c_[t].array()).matrix();

        h_prev = h_[t];
        c_prev = c_[t];
    }
    h_last_ = h_prev;
    return h_last_;
}

Eigen::MatrixXd LstmLayer::hidden_sequence(const Eigen::MatrixXd& window) const {
    const auto T = window.rows();
    const auto U = units_;
    Eigen::MatrixXd seq(T, U);
    Eigen::RowVectorXd h = Eigen::RowVectorXd::Zero(U);
    Eigen::RowVectorXd c = Eigen::RowVectorXd::Zero(U);
    for (Eigen::Index t = 0; t < T; ++t) {
        Eigen::VectorXd pre = W_.value * window.row(t).transpose() + R_.value * h.transpose() +
                              b_.value.col(0);
        const auto i = sigmoid(pre.segment(0, U).array());
        const auto f = sigmoid(pre.segment(U, U).array());
        const auto g = pre.segment(2 * U, U).array().tanh();
        const auto o = sigmoid(pre.segment(3 * U, U).array());
        c = (f * c.transpose().array() + i * g).matrix().transpose();
        h = (o * c.transpose().array().tanh()).matrix().transpose();
        seq.row(t) = h;
    }
    return seq;
}

Eigen::MatrixXd LstmLayer::infer(const std::vector<Eigen::MatrixXd>& inputs) const {
    const auto T = inputs.size();
    const auto B = inputs.empty() ? 0 : inputs[0].rows();
    if (T == 0 || B == 0) throw DataError("lstm infer: empty input");
    const auto U = units_;

    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(B, U);
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(B, U);
    for (std::size_t t = 0; t < T; ++t) {
        Eigen::MatrixXd pre = inputs[t] * W_.value.transpose() + h * R_.value.transpose();
        pre.rowwise() += b_.value.col(0).transpose();
        const Eigen::ArrayXXd i = sigmoid(pre.block(0, 0, B, U).array());
        const Eigen::ArrayXXd f = sigmoid(pre.block(0, U, B, U).array());
        const Eigen::ArrayXXd g = pre.block(0, 2 * U, B, U).array().tanh();
        const Eigen::ArrayXXd o = sigmoid(pre.block(0, 3 * U, B, U).array());
        c = (f * c.array() + i * g).matrix();
        h = (o * c.array().tanh()).matrix();
    }
    return h;
}

void LstmLayer::backward(const Eigen::MatrixXd& dLast, std::vector<Eigen::MatrixXd>* input_grads) {
    const auto T = x_.size();
    const auto B = dLast.rows();
    const auto U = units_;
    if (input_grads) input_grads->assign(T, Eigen::MatrixXd::Zero(B, input_dim_));

    Eigen::MatrixXd dh = dLast;
    Eigen::MatrixXd dc = Eigen::MatrixXd::Zero(B, U);
    Eigen::MatrixXd dpre(B, 4 * U);

    for (std::size_t t = T; t-- > 0;) {
        const Eigen::ArrayXXd dh_a = dh.array();
        const Eigen::ArrayXXd o_a = o_[t].array();
        const Eigen::ArrayXXd tc = tanh_c_[t].array();

        dc.array() += dh_a * o_a * (1.0 - tc * tc);
        const Eigen::ArrayXXd dc_a = dc.array();

        const Eigen::ArrayXXd i_a = i_[t].array();
        const Eigen::ArrayXXd f_a = f_[t].array();
        const Eigen::ArrayXXd g_a = g_[t].array();
        Eigen::ArrayXXd c_prev = Eigen::ArrayXXd::Zero(B, U);
        if (t > 0) c_prev = c_[t - 1].array();

        dpre.block(0, 0, B, U) = (dc_a * g_a * i_a * (1.0 - i_a)).matrix();          // input gate
        dpre.block(0, U, B, U) = (dc_a * c_prev * f_a * (1.0 - f_a)).matrix();       // forget gate
        dpre.block(0, 2 * U, B, U) = (dc_a * i_a * (1.0 - g_a * g_a)).matrix();      // candidate
        dpre.block(0, 3 * U, B, U) = (dh_a * tc * o_a * (1.0 - o_a)).matrix();       // output gate

        W_.grad.noalias() += dpre.transpose() * x_[t];
        if (t > 0) R_.grad.noalias() += dpre.transpose() * h_[t - 1];
        b_.grad.col(0).noalias() += dpre.colwise().sum().transpose();

        if (input_grads) (*input_grads)[t].noalias() = dpre * W_.value;

        dh.noalias() = dpre * R_.value;
        dc = (dc_a * f_a).matrix();
    }
}

nlohmann::json LstmLayer::save() const {
    return {{"input_dim", input_dim_},
            {"units", units_},
            {"W", matrix_to_json(W_.value)},
            {"R", matrix_to_json(R_.value)},
            {"b", matrix_to_json(b_.value)}};
}

void LstmLayer::load(const nlohmann::json& j) {
    input_dim_ = j.at("input_dim").get<Eigen::Index>();
    units_ = j.at("units").get<Eigen::Index>();
    W_ = ParamBlock("lstm.W", 4 * units_, input_dim_);
    R_ = ParamBlock("lstm.R", 4 * units_, units_);
    b_ = ParamBlock("lstm.b", 4 * units_, 1);
    W_.value = matrix_from_json(j.at("W"));
    R_.value = matrix_from_json(j.at("R"));
    b_.value = matrix_from_json(j.at("b"));
}

// ---------------------------------------------------------------------------
// DenseLayer

DenseLayer::DenseLayer(Eigen::Index input_dim, Eigen::Index output_dim)
    : W_("dense.W", output_dim, input_dim), b_("dense.b", output_dim, 1) {}

void DenseLayer::init_weights(Rng& rng, double scale) {
    fill_uniform(W_.value, rng, scale);
    b_.value.setZero();
}

Eigen::MatrixXd DenseLayer::forward(const Eigen::MatrixXd& input) {
    input_cache_ = input;
    Eigen::MatrixXd out = input * W_.value.transpose();
    out.rowwise() += b_.value.col(0).transpose();
    return out;
}

Eigen::MatrixXd DenseLayer::backward(const Eigen::MatrixXd& dOut) {
    W_.grad.noalias() += dOut.transpose() * input_cache_;
    b_.grad.col(0).noalias() += dOut.colwise().sum().transpose();
    return dOut * W_.value;
}

Eigen::MatrixXd DenseLayer::apply(const Eigen::MatrixXd& input) const {
    Eigen::MatrixXd out = input * W_.value.transpose();
    out.rowwise() += b_.value.col(0).transpose();
    return out;
}

nlohmann::json DenseLayer::save() const {
    return {{"W", matrix_to_json(W_.value)}, {"b", matrix_to_json(b_.value)}};
}

void DenseLayer::load(const nlohmann::json& j) {
    Eigen::MatrixXd W = matrix_from_json(j.at("W"));
    Eigen::MatrixXd b = matrix_from_json(j.at("b"));
    W_ = ParamBlock("dense.W", W.rows(), W.cols());
    b_ = ParamBlock("dense.b", b.rows(), 1);
    W_.value = std::move(W);
    b_.value = std::move(b);
}

// ---------------------------------------------------------------------------
// Conv1DLayer

Conv1DLayer::Conv1DLayer(Eigen::Index channels, Eigen::Index filters, Eigen::Index kernel)
    : channels_(channels),
      filters_(filters),
      kernel_(kernel),
      W_("conv.W", filters, kernel * channels),
      b_("conv.b", filters, 1) {}

void Conv1DLayer::init_weights(Rng& rng, double scale) {
    fill_uniform(W_.value, rng, scale);
    b_.value.setZero();
}

std::vector<Eigen::MatrixXd> Conv1DLayer::forward(const std::vector<Eigen::MatrixXd>& windows,
                                                  bool apply_relu) {
    relu_ = apply_relu;
    const auto n = windows.size();
    cols_.assign(n, {});
    pre_act_.assign(n, {});
    std::vector<Eigen::MatrixXd> out(n);
    for (std::size_t w = 0; w < n; ++w) {
        const auto T = windows[w].rows();
        if (T < kernel_) throw DataError("conv1d: window shorter than the kernel");
        const auto L = T - kernel_ + 1;
        Eigen::MatrixXd col(L, kernel_ * channels_);
        for (Eigen::Index t = 0; t < L; ++t)
            for (Eigen::Index k = 0; k < kernel_; ++k)
                col.row(t).segment(k * channels_, channels_) = windows[w].row(t + k);
        Eigen::MatrixXd pre = col * W_.value.transpose();
        pre.rowwise() += b_.value.col(0).transpose();
        cols_[w] = std::move(col);
        pre_act_[w] = pre;
        out[w] = relu_ ? pre.cwiseMax(0.0) : pre;
    }
    return out;
}

Eigen::MatrixXd Conv1DLayer::apply(const Eigen::MatrixXd& window, bool relu) const {
    const auto T = window.rows();
    if (T < kernel_) throw DataError("conv1d: window shorter than the kernel");
    const auto L = T - kernel_ + 1;
    Eigen::MatrixXd col(L, kernel_ * channels_);
    for (Eigen::Index t = 0; t < L; ++t)
        for (Eigen::Index k = 0; k < kernel_; ++k)
            col.row(t).segment(k * channels_, channels_) = window.row(t + k);
    Eigen::MatrixXd out = col * W_.value.transpose();
    out.rowwise() += b_.value.col(0).transpose();
    return relu ? out.cwiseMax(0.0) : out;
}

std::vector<Eigen::MatrixXd> Conv1DLayer::backward(const std::vector<Eigen::MatrixXd>& dOut) {
    std::vector<Eigen::MatrixXd> dIn(dOut.size());
    for (std::size_t w = 0; w < dOut.size(); ++w) {
        Eigen::MatrixXd dPre = dOut[w];
        if (relu_) {
            dPre = (pre_act_[w].array() > 0.0).select(dPre, 0.0);
        }
        W_.grad.noalias() += dPre.transpose() * cols_[w];
        b_.grad.col(0).noalias() += dPre.colwise().sum().transpose();
        const Eigen::MatrixXd dCol = dPre * W_.value;
        const auto L = dPre.rows();
        Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(L + kernel_ - 1, channels_);
        for (Eigen::Index t = 0; t < L; ++t)
            for (Eigen::Index k = 0; k < kernel_; ++k)
                dx.row(t + k) += dCol.row(t).segment(k * channels_, channels_);
        dIn[w] = std::move(dx);
    }
    return dIn;
}

nlohmann::json Conv1DLayer::save() const {
    return {{"channels", channels_},
            {"filters", filters_},
            {"kernel", kernel_},
            {"W", matrix_to_json(W_.value)},
            {"b", matrix_to_json(b_.value)}};
}

void Conv1DLayer::load(const nlohmann::json& j) {
    channels_ = j.at("channels").get<Eigen::Index>();
    filters_ = j.at("filters").get<Eigen::Index>();
    kernel_ = j.at("kernel").get<Eigen::Index>();
    W_ = ParamBlock("conv.W", filters_, kernel_ * channels_);
    b_ = ParamBlock("conv.b", filters_, 1);
    W_.value = matrix_from_json(j.at("W"));
    b_.value = matrix_from_json(j.at("b"));
}

// ---------------------------------------------------------------------------
// MaxPool1D

std::vector<Eigen::MatrixXd> MaxPool1D::forward(const std::vector<Eigen::MatrixXd>& seqs) {
    argmax_.assign(seqs.size(), {});
    in_len_.assign(seqs.size(), 0);
    std::vector<Eigen::MatrixXd> out(seqs.size());
    for (std::size_t w = 0; w < seqs.size(); ++w) {
        const auto T = seqs[w].rows();
        const auto C = seqs[w].cols();
        channels_ = C;
        in_len_[w] = T;
        const auto L = T / size_;
        if (L == 0) throw DataError("max pool: sequence shorter than the pool size");
        Eigen::MatrixXd pooled(L, C);
        Eigen::MatrixXi arg(L, C);
        for (Eigen::Index t = 0; t < L; ++t) {
            for (Eigen::Index c = 0; c < C; ++c) {
                double best = seqs[w](t * size_, c);
                Eigen::Index best_r = t * size_;
                for (Eigen::Index r = 1; r < size_; ++r) {
                    const double v = seqs[w](t * size_ + r, c);
                    if (v > best) {
                        best = v;
                        best_r = t * size_ + r;
                    }
                }
                pooled(t, c) = best;
                arg(t, c) = static_cast<int>(best_r);
            }
        }
        out[w] = std::move(pooled);
        argmax_[w] = std::move(arg);
    }
    return out;
}

Eigen::MatrixXd MaxPool1D::apply(const Eigen::MatrixXd& seq, Eigen::Index size) {
    const auto L = seq.rows() / size;
    if (L == 0) throw DataError("max pool: sequence shorter than the pool size");
    Eigen::MatrixXd pooled(L, seq.cols());
    for (Eigen::Index t = 0; t < L; ++t)
        for (Eigen::Index c = 0; c < seq.cols(); ++c)
            pooled(t, c) = seq.block(t * size, c, size, 1).maxCoeff();
    return pooled;
}

std::vector<Eigen::MatrixXd> MaxPool1D::backward(const std::vector<Eigen::MatrixXd>& dOut) {
    std::vector<Eigen::MatrixXd> dIn(dOut.size());
    for (std::size_t w = 0; w < dOut.size(); ++w) {
        Eigen::MatrixXd dx = Eigen::MatrixXd::Zero(in_len_[w], channels_);
        for (Eigen::Index t = 0; t < dOut[w].rows(); ++t)
            for (Eigen::Index c = 0; c < channels_; ++c)
                dx(argmax_[w](t, c), c) += dOut[w](t, c);
        dIn[w] = std::move(dx);
    }
    return dIn;
}

// ---------------------------------------------------------------------------
// Adam

void Adam::step(const std::vector<ParamBlock*>& params) {
    ++t_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (ParamBlock* p : params) {
        p->adam_m = cfg_.beta1 * p->adam_m + (1.0 - cfg_.beta1) * p->grad;
        p->adam_v = cfg_.beta2 * p->adam_v.array().matrix() +
                    (1.0 - cfg_.beta2) * p->grad.array().square().matrix();
        p->value.array() -= cfg_.lr * (p->adam_m.array() / bc1) /
                            ((p->adam_v.array() / bc2).sqrt() + cfg_.eps);
    }
}

}  // namespace teleop::learn
