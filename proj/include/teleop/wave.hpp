#pragma once

#include <cmath>
#include <utility>

#include "teleop/common.hpp"

namespace teleop::sim {

// Wave impedance of the scattering transform (N*s/m).
struct WaveParams {
    double b = 62.1208;
};

struct WavePair {
    double u = 0.0;  // forward wave
    double w = 0.0;  // backward wave
};

struct ForceVelocity {
    double force = 0.0;
    double velocity = 0.0;
};

// Scattering transform. Satisfies the power identity F*v == (u^2 - w^2)/2.
inline WavePair wave_encode(double force, double velocity, const WaveParams& p) {
    if (p.b <= 0.0) throw ConfigError("wave impedance b must be positive");
    const double s = std::sqrt(2.0 * p.b);
    return {(p.b * velocity + force) / s, (p.b * velocity - force) / s};
}

inline ForceVelocity wave_decode(const WavePair& waves, const WaveParams& p) {
    if (p.b <= 0.0) throw ConfigError("wave impedance b must be positive");
    const double s = std::sqrt(2.0 * p.b);
    return {s * (waves.u - waves.w) / 2.0, (waves.u + waves.w) / s};
}

}  // namespace teleop::sim
