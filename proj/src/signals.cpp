#include "teleop/signals.hpp"

#include <cmath>
#include <numbers>

#include "teleop/common.hpp"
#include "teleop/rng.hpp"

namespace teleop::data {

SignalSpec::Kind SignalSpec::parse_kind(const std::string& s) {
    if (s == "step") return Kind::step;
    if (s == "sine") return Kind::sine;
    if (s == "spline") return Kind::spline;
    throw ConfigError("unknown signal kind '" + s + "' (expected step, sine, or spline)");
}

std::string SignalSpec::kind_name(Kind k) {
    switch (k) {
        case Kind::step: return "step";
        case Kind::sine: return "sine";
        case Kind::spline: return "spline";
    }
    return "?";
}

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
    const std::size_t n = x_.size();
    if (n != y_.size() || n < 2) throw ConfigError("spline needs at least two knots");
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (x_[i + 1] <= x_[i]) throw ConfigError("spline knots must be strictly increasing in t");
    }
    // Natural spline: tridiagonal solve for second derivatives.
    m_.assign(n, 0.0);
    std::vector<double> c(n, 0.0), d(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double h0 = x_[i] - x_[i - 1];
        const double h1 = x_[i + 1] - x_[i];
        const double rhs = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
        const double diag = 2.0 * (h0 + h1) - h0 * c[i - 1];
        c[i] = h1 / diag;
        d[i] = (rhs - h0 * d[i - 1]) / diag;
    }
    for (std::size_t i = n - 1; i-- > 1;) {
        m_[i] = d[i] - c[i] * m_[i + 1];
    }
}

double CubicSpline::operator()(double t) const {
    if (t <= x_.front()) return y_.front();
    if (t >= x_.back()) return y_.back();
    std::size_t lo = 0, hi = x_.size() - 1;
    while (hi - lo > 1) {
        const std::size_t mid = (lo + hi) / 2;
        (x_[mid] <= t ? lo : hi) = mid;
    }
    const double h = x_[hi] - x_[lo];
    const double a = (x_[hi] - t) / h;
    const double b = (t - x_[lo]) / h;
    return a * y_[lo] + b * y_[hi] +
           ((a * a * a - a) * m_[lo] + (b * b * b - b) * m_[hi]) * h * h / 6.0;
}

std::vector<double> generate_input_signal(const SignalSpec& spec, double duration, double dt) {
    if (duration <= 0.0 || dt <= 0.0) throw ConfigError("signal duration and dt must be positive");
    const auto n = static_cast<std::size_t>(std::round(duration / dt));
    std::vector<double> out(n, 0.0);

    switch (spec.kind) {
        case SignalSpec::Kind::step: {
            const double t_on = duration / 10.0;
            for (std::size_t k = 0; k < n; ++k) {
                const double t = static_cast<double>(k) * dt;
                out[k] = t < t_on ? 0.0 : spec.amplitude;
            }
            break;
        }
        case SignalSpec::Kind::sine: {
            for (std::size_t k = 0; k < n; ++k) {
                const double t = static_cast<double>(k) * dt;
                out[k] = spec.amplitude * std::sin(2.0 * std::numbers::pi * spec.frequency * t);
            }
            break;
        }
        case SignalSpec::Kind::spline: {
            auto knots = spec.knots;
            if (knots.empty()) {
                Rng rng(spec.seed);
                for (double t = 0.0; t <= duration + 1e-12; t += spec.knot_period) {
                    knots.emplace_back(t, rng.uniform(-spec.amplitude, spec.amplitude));
                }
            }
            std::vector<double> xs, ys;
            xs.reserve(knots.size());
            ys.reserve(knots.size());
            for (const auto& [t, v] : knots) {
                xs.push_back(t);
                ys.push_back(v);
            }
            const CubicSpline spline(xs, ys);
            for (std::size_t k = 0; k < n; ++k) {
                out[k] = spline(static_cast<double>(k) * dt);
            }
            break;
        }
    }
    return out;
}

}  // namespace teleop::data
