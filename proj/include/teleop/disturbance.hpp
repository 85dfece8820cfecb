#pragma once

#include <cstdint>
#include <vector>

namespace teleop::sim {

// Piecewise-constant delay profile: one value per sample_period interval.
struct DelayProfile {
    double base_delay = 0.1;
    std::vector<double> samples;
    double sample_period = 2.0;
    std::uint64_t seed = 0;

    // Delay at time t (clamps to the last segment beyond the profile).
    double at(double t) const;

    static DelayProfile constant(double delay, double duration, double sample_period = 2.0);
};

struct DelayConfig {
    double base_delay = 0.1;
    double variance = 0.001;
    double sample_period = 2.0;
    double delay_max = 1.0;
    std::uint64_t seed = 0;
};

// Band-limited white noise: zero-order-hold Gaussian samples with
// variance power / sample_period.
struct NoiseConfig {
    double power = 1.0;
    double sample_period = 0.1;
    std::uint64_t seed = 0;
};

// Gaussian jitter around base_delay, redrawn every sample_period, clamped
// to [0, delay_max]. Deterministic for a given seed.
DelayProfile generate_delay_profile(const DelayConfig& cfg, double duration);

std::vector<double> generate_noise(const NoiseConfig& cfg, double duration, double dt);

// out[k] = signal(t_k - Td(t_k)) with linear interpolation; reads before
// t = 0 return 0.
std::vector<double> apply_variable_delay(const std::vector<double>& signal,
                                         const DelayProfile& profile, double dt);

// Linear interpolation of a uniformly sampled series at time t (<0 reads 0,
// beyond the end clamps to the last sample).
double sample_series(const std::vector<double>& signal, double t, double dt);

}  // namespace teleop::sim
