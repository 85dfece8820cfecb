#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "teleop/disturbance.hpp"
#include "teleop/transfer_function.hpp"
#include "teleop/wave.hpp"

namespace teleop::sim {

// Parameters of the four-channel teleoperation plant. Defaults are the
// tuned single-DoF baseline: Zm = Zs = 0.25s + 0.8, Cm = Cs = 0.0449 + 1/s,
// C1 = -C4 = 1 + 1/s, C2 = 0.5, C3 = 2.1790e-5, C5 = -5.8165, C6 = 0.0038,
// wave impedance b = 62.1208.
struct PlantConfig {
    RationalTF Zm = RationalTF({0.25, 0.8}, {1.0});
    RationalTF Zs = RationalTF({0.25, 0.8}, {1.0});
    RationalTF Cm = RationalTF::pi(0.0449);
    RationalTF Cs = RationalTF::pi(0.0449);
    RationalTF C1 = RationalTF::pi(1.0);
    double C2 = 0.5;
    double C3 = 2.1790e-5;
    RationalTF C4 = RationalTF::pi(1.0).scaled(-1.0);
    double C5 = -5.8165;
    double C6 = 0.0038;
    WaveParams wave{};

    double dt = 0.01;
    double duration = 30.0;

    // Slave-side contact environment (configuration, not part of the tuned
    // baseline).
    double env_stiffness = 100.0;
    double env_damping = 1.0;

    double nominal_delay = 0.1;  // channel delay of the ideal scenario (s)
    double overflow_limit = 1e6;
};

struct Disturbance {
    DelayProfile delay;
    NoiseConfig noise_m1;
    NoiseConfig noise_n2;
};

// Time-aligned traces of one closed-loop run. M1/N2 are the signals entering
// the communication channel (master/slave side), N1/M2 the delivered ones.
struct ScenarioResult {
    std::vector<double> t;
    std::vector<double> Fh_star;
    std::vector<double> M1, N1, M2, N2;
    std::vector<double> Td;
    bool disturbed = false;
};

// Closed-loop fixed-step run.
//
// Wiring (single source of truth for the loop equations):
//   master:  (Zm + Cm) v_m = Fh* - (C2 + C6) M2 - C4{M2 / b}
//   launch:  M1 = sqrt(b/2) * u,  u = wave_encode(Fh*, v_m).u
//            => M1 = (b v_m + Fh*) / 2            (+ channel noise if disturbed)
//   channel: N1(t) = M1(t - Td(t)),  M2(t) = N2(t - Td(t)),
//            with Td floored at one step inside the loop for causality
//   slave:   (Zs + Cs + (1 - C5) Zenv) v_s = C1{N1 / b} + C3 N1,
//            Fe = Zenv{v_s},  Zenv = env_damping + env_stiffness / s
//   launch:  N2 = sqrt(b/2) * w,  w = wave_encode(Fe, v_s).w
//            => N2 = (b v_s - Fe) / 2             (+ channel noise if disturbed)
//
// Local feedback loops are folded into the master/slave denominators before
// discretization, so no algebraic loop remains. Ideal runs use the constant
// nominal delay and no noise. Throws DivergenceError if any signal magnitude
// exceeds overflow_limit.
ScenarioResult simulate_scenario(const PlantConfig& cfg, const std::vector<double>& input,
                                 const std::optional<Disturbance>& disturbance = std::nullopt);

// Trapezoidal wave-energy integrals at the two channel ports:
// E_in from (M1, N2), E_out from (N1, M2); power of a port signal x is x^2/b.
struct EnergyBalance {
    double e_in = 0.0;
    double e_out = 0.0;
};

EnergyBalance channel_energy_balance(const ScenarioResult& res, const WaveParams& p);

// Prefix series of E_in(T) - E_out(T) at every step (for passivity checks).
std::vector<double> channel_energy_margin(const ScenarioResult& res, const WaveParams& p);

// CSV with header t,Fh_star,M1,N1,M2,N2,Td,disturbed and >= 15 significant
// digits per value.
void write_scenario_csv(const ScenarioResult& res, const std::string& path);
ScenarioResult read_scenario_csv(const std::string& path);

}  // namespace teleop::sim
