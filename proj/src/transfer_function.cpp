#include "teleop/transfer_function.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "teleop/common.hpp"

namespace teleop::sim {

std::vector<double> poly_trim(std::vector<double> p) {
    std::size_t lead = 0;
    while (lead + 1 < p.size() && p[lead] == 0.0) ++lead;
    p.erase(p.begin(), p.begin() + static_cast<std::ptrdiff_t>(lead));
    return p;
}

std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b) {
    std::vector<double> out(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j) out[i + j] += a[i] * b[j];
    return out;
}

std::vector<double> poly_add(const std::vector<double>& a, const std::vector<double>& b) {
    const std::size_t n = std::max(a.size(), b.size());
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i) out[n - a.size() + i] += a[i];
    for (std::size_t i = 0; i < b.size(); ++i) out[n - b.size() + i] += b[i];
    return out;
}

RationalTF::RationalTF(std::vector<double> n, std::vector<double> d)
    : num(poly_trim(std::move(n))), den(poly_trim(std::move(d))) {
    if (den.empty() || den[0] == 0.0) {
        throw ConfigError("transfer function denominator must have a nonzero leading coefficient");
    }
    if (num.empty()) num = {0.0};
}

RationalTF RationalTF::operator+(const RationalTF& other) const {
    return RationalTF(poly_add(poly_mul(num, other.den), poly_mul(other.num, den)),
                      poly_mul(den, other.den));
}

RationalTF RationalTF::operator*(const RationalTF& other) const {
    return RationalTF(poly_mul(num, other.num), poly_mul(den, other.den));
}

RationalTF RationalTF::inverse() const {
    bool all_zero = true;
    for (double c : num) all_zero = all_zero && c == 0.0;
    if (all_zero) throw ConfigError("cannot invert a zero transfer function");
    return RationalTF(den, num);
}

RationalTF RationalTF::scaled(double g) const {
    std::vector<double> n = num;
    for (double& c : n) c *= g;
    return RationalTF(n, den);
}

DiscreteFilter::DiscreteFilter(std::vector<double> b, std::vector<double> a, double dt)
    : b_(std::move(b)), a_(std::move(a)), dt_(dt) {
    if (a_.empty() || a_[0] == 0.0) {
        throw ConfigError("discrete filter denominator must start with a nonzero coefficient");
    }
    const double a0 = a_[0];
    for (double& c : a_) c /= a0;
    for (double& c : b_) c /= a0;
    if (b_.size() < a_.size()) b_.insert(b_.begin(), a_.size() - b_.size(), 0.0);
    if (a_.size() < b_.size()) a_.insert(a_.begin(), b_.size() - a_.size(), 0.0);
    state_.assign(a_.size() > 0 ? a_.size() - 1 : 0, 0.0);
}

double DiscreteFilter::step(double input) {
    const double out = b_[0] * input + (state_.empty() ? 0.0 : state_[0]);
    for (std::size_t i = 0; i + 1 < state_.size(); ++i) {
        state_[i] = b_[i + 1] * input + state_[i + 1] - a_[i + 1] * out;
    }
    if (!state_.empty()) {
        state_.back() = b_.back() * input - a_.back() * out;
    }
    return out;
}

void DiscreteFilter::reset() { std::fill(state_.begin(), state_.end(), 0.0); }

DiscreteFilter discretize(const RationalTF& tf, double dt, const std::string& name) {
    if (dt <= 0.0) throw ConfigError("discretize(" + name + "): dt must be positive");
    if (!tf.proper()) {
        throw ConfigError("discretize(" + name + "): improper transfer function (numerator degree " +
                          std::to_string(tf.num_degree()) + " > denominator degree " +
                          std::to_string(tf.den_degree()) + ")");
    }
    const std::size_t n = tf.den_degree();
    const double k = 2.0 / dt;

    // s^j maps to k^j * (z-1)^j * (z+1)^(n-j), expressed over (z+1)^n.
    std::vector<double> num(tf.num);
    num.insert(num.begin(), n + 1 - num.size(), 0.0);

    std::vector<double> bz(n + 1, 0.0);
    std::vector<double> az(n + 1, 0.0);
    for (std::size_t i = 0; i <= n; ++i) {
        const std::size_t deg = n - i;  // power of s for coefficient i
        std::vector<double> term{1.0};
        for (std::size_t j = 0; j < deg; ++j) term = poly_mul(term, {1.0, -1.0});
        for (std::size_t j = 0; j < n - deg; ++j) term = poly_mul(term, {1.0, 1.0});
        const double scale = std::pow(k, static_cast<double>(deg));
        for (std::size_t j = 0; j <= n; ++j) {
            bz[j] += num[i] * scale * term[j];
            az[j] += tf.den[i] * scale * term[j];
        }
    }
    return DiscreteFilter(bz, az, dt);
}

}  // namespace teleop::sim
