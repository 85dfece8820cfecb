#include "teleop/disturbance.hpp"

#include <algorithm>
#include <cmath>

#include "teleop/common.hpp"
#include "teleop/rng.hpp"

namespace teleop::sim {

double DelayProfile::at(double t) const {
    if (samples.empty()) return base_delay;
    if (t < 0.0) return samples.front();
    auto idx = static_cast<std::size_t>(t / sample_period);
    if (idx >= samples.size()) idx = samples.size() - 1;
    return samples[idx];
}

DelayProfile DelayProfile::constant(double delay, double duration, double sample_period) {
    DelayProfile p;
    p.base_delay = delay;
    p.sample_period = sample_period;
    const auto n = static_cast<std::size_t>(std::ceil(duration / sample_period));
    p.samples.assign(std::max<std::size_t>(n, 1), delay);
    return p;
}

DelayProfile generate_delay_profile(const DelayConfig& cfg, double duration) {
    if (cfg.variance < 0.0) throw ConfigError("delay variance must be non-negative");
    if (duration <= 0.0) throw ConfigError("delay profile duration must be positive");
    if (cfg.sample_period <= 0.0) throw ConfigError("delay sample_period must be positive");

    DelayProfile p;
    p.base_delay = cfg.base_delay;
    p.sample_period = cfg.sample_period;
    p.seed = cfg.seed;
    const auto n = static_cast<std::size_t>(std::ceil(duration / cfg.sample_period));
    p.samples.resize(std::max<std::size_t>(n, 1));

    Rng rng(cfg.seed);
    const double sigma = std::sqrt(cfg.variance);
    for (double& s : p.samples) {
        s = std::clamp(cfg.base_delay + rng.gaussian(0.0, sigma), 0.0, cfg.delay_max);
    }
    return p;
}

std::vector<double> generate_noise(const NoiseConfig& cfg, double duration, double dt) {
    if (cfg.power < 0.0) throw ConfigError("noise power must be non-negative");
    if (cfg.sample_period <= 0.0) throw ConfigError("noise sample_period must be positive");
    if (dt > cfg.sample_period) throw ConfigError("noise sample_period must be >= simulation dt");

    const auto n = static_cast<std::size_t>(std::round(duration / dt));
    std::vector<double> out(n, 0.0);
    if (cfg.power == 0.0) return out;

    Rng rng(cfg.seed);
    const double sigma = std::sqrt(cfg.power / cfg.sample_period);
    double held = 0.0;
    std::size_t last_segment = static_cast<std::size_t>(-1);
    for (std::size_t k = 0; k < n; ++k) {
        const auto segment = static_cast<std::size_t>(static_cast<double>(k) * dt / cfg.sample_period);
        if (segment != last_segment) {
            held = rng.gaussian(0.0, sigma);
            last_segment = segment;
        }
        out[k] = held;
    }
    return out;
}

double sample_series(const std::vector<double>& signal, double t, double dt) {
    if (t < 0.0 || signal.empty()) return 0.0;
    double pos = t / dt;
    // Snap to the grid when t is an integer multiple of dt up to rounding, so
    // that integer-step delays are exact shifts.
    const double snapped = std::round(pos);
    if (std::abs(pos - snapped) < 1e-9) pos = snapped;
    const auto lo = static_cast<std::size_t>(pos);
    if (lo >= signal.size() - 1) return signal.back();
    const double frac = pos - static_cast<double>(lo);
    if (frac == 0.0) return signal[lo];
    return signal[lo] + frac * (signal[lo + 1] - signal[lo]);
}

std::vector<double> apply_variable_delay(const std::vector<double>& signal,
                                         const DelayProfile& profile, double dt) {
    std::vector<double> out(signal.size(), 0.0);
    for (std::size_t k = 0; k < signal.size(); ++k) {
        const double t = static_cast<double>(k) * dt;
        out[k] = sample_series(signal, t - profile.at(t), dt);
    }
    return out;
}

}  // namespace teleop::sim
