#include "teleop/channel_sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "teleop/common.hpp"

namespace teleop::sim {

namespace {

void check_magnitude(double value, const char* name, double limit, std::size_t k) {
    if (!std::isfinite(value) || std::abs(value) > limit) {
        throw DivergenceError(std::string("signal ") + name + " diverged at step " +
                                  std::to_string(k) + " (value " + std::to_string(value) + ")",
                              k);
    }
}

}  // namespace

ScenarioResult simulate_scenario(const PlantConfig& cfg, const std::vector<double>& input,
                                 const std::optional<Disturbance>& disturbance) {
    if (cfg.dt <= 0.0) throw ConfigError("PlantConfig.dt must be positive");
    if (input.empty()) throw ConfigError("simulate_scenario: input series is empty");

    const std::size_t n = input.size();
    const double dt = cfg.dt;
    const double b = cfg.wave.b;
    if (b <= 0.0) throw ConfigError("wave impedance b must be positive");

    // Local loops folded into single strictly-proper blocks (see header).
    const RationalTF env_tf({cfg.env_damping, cfg.env_stiffness}, {1.0, 0.0});
    DiscreteFilter master = discretize((cfg.Zm + cfg.Cm).inverse(), dt, "1/(Zm+Cm)");
    DiscreteFilter slave = discretize(
        (cfg.Zs + cfg.Cs + env_tf.scaled(1.0 - cfg.C5)).inverse(), dt, "1/(Zs+Cs+(1-C5)Zenv)");
    DiscreteFilter c4_master = discretize(cfg.C4, dt, "C4");
    DiscreteFilter c1_slave = discretize(cfg.C1, dt, "C1");
    DiscreteFilter env = discretize(env_tf, dt, "Zenv");

    std::vector<double> noise_m1(n, 0.0), noise_n2(n, 0.0);
    if (disturbance) {
        const double duration = static_cast<double>(n) * dt;
        noise_m1 = generate_noise(disturbance->noise_m1, duration, dt);
        noise_n2 = generate_noise(disturbance->noise_n2, duration, dt);
    }

    ScenarioResult res;
    res.disturbed = disturbance.has_value();
    res.t.resize(n);
    res.Fh_star = input;
    res.M1.assign(n, 0.0);
    res.N1.assign(n, 0.0);
    res.M2.assign(n, 0.0);
    res.N2.assign(n, 0.0);
    res.Td.resize(n);

    const double half_sqrt = 0.5;  // sqrt(b/2) / sqrt(2b) = 1/2

    for (std::size_t k = 0; k < n; ++k) {
        const double t = static_cast<double>(k) * dt;
        res.t[k] = t;

        const double td = disturbance ? disturbance->delay.at(t) : cfg.nominal_delay;
        res.Td[k] = td;
        // Inside the loop the delivered signals lag at least one step, so the
        // current step's launches are never needed before they exist.
        const double td_eff = std::max(td, dt);

        res.N1[k] = sample_series(res.M1, t - td_eff, dt);
        res.M2[k] = sample_series(res.N2, t - td_eff, dt);

        // Master side.
        const double c4_out = c4_master.step(res.M2[k] / b);
        const double master_drive = input[k] - (cfg.C2 + cfg.C6) * res.M2[k] - c4_out;
        const double v_m = master.step(master_drive);
        const WavePair fwd = wave_encode(input[k], v_m, cfg.wave);
        res.M1[k] = std::sqrt(2.0 * b) * half_sqrt * fwd.u + noise_m1[k];

        // Slave side.
        const double slave_drive = c1_slave.step(res.N1[k] / b) + cfg.C3 * res.N1[k];
        const double v_s = slave.step(slave_drive);
        const double f_env = env.step(v_s);
        const WavePair bwd = wave_encode(f_env, v_s, cfg.wave);
        res.N2[k] = std::sqrt(2.0 * b) * half_sqrt * bwd.w + noise_n2[k];

        check_magnitude(v_m, "v_m", cfg.overflow_limit, k);
        check_magnitude(v_s, "v_s", cfg.overflow_limit, k);
        check_magnitude(f_env, "Fe", cfg.overflow_limit, k);
        check_magnitude(res.M1[k], "M1", cfg.overflow_limit, k);
        check_magnitude(res.N1[k], "N1", cfg.overflow_limit, k);
        check_magnitude(res.M2[k], "M2", cfg.overflow_limit, k);
        check_magnitude(res.N2[k], "N2", cfg.overflow_limit, k);
    }
    return res;
}

std::vector<double> channel_energy_margin(const ScenarioResult& res, const WaveParams& p) {
    const std::size_t n = res.t.size();
    std::vector<double> margin(n, 0.0);
    if (n == 0) return margin;
    const double dt = n > 1 ? res.t[1] - res.t[0] : 0.0;

    auto power_in = [&](std::size_t k) {
        return (res.M1[k] * res.M1[k] + res.N2[k] * res.N2[k]) / p.b;
    };
    auto power_out = [&](std::size_t k) {
        return (res.N1[k] * res.N1[k] + res.M2[k] * res.M2[k]) / p.b;
    };

    double acc = 0.0;
    margin[0] = 0.0;
    for (std::size_t k = 1; k < n; ++k) {
        const double p_net_prev = power_in(k - 1) - power_out(k - 1);
        const double p_net = power_in(k) - power_out(k);
        acc += 0.5 * dt * (p_net_prev + p_net);
        margin[k] = acc;
    }
    return margin;
}

EnergyBalance channel_energy_balance(const ScenarioResult& res, const WaveParams& p) {
    EnergyBalance e;
    const std::size_t n = res.t.size();
    if (n < 2) return e;
    const double dt = res.t[1] - res.t[0];
    for (std::size_t k = 0; k < n; ++k) {
        const double w = (k == 0 || k == n - 1) ? 0.5 : 1.0;
        e.e_in += w * dt * (res.M1[k] * res.M1[k] + res.N2[k] * res.N2[k]) / p.b;
        e.e_out += w * dt * (res.N1[k] * res.N1[k] + res.M2[k] * res.M2[k]) / p.b;
    }
    return e;
}

void write_scenario_csv(const ScenarioResult& res, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path + " for writing");
    out << "t,Fh_star,M1,N1,M2,N2,Td,disturbed\n";
    char buf[512];
    for (std::size_t k = 0; k < res.t.size(); ++k) {
        std::snprintf(buf, sizeof(buf),
                      "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d\n", res.t[k],
                      res.Fh_star[k], res.M1[k], res.N1[k], res.M2[k], res.N2[k], res.Td[k],
                      res.disturbed ? 1 : 0);
        out << buf;
    }
}

ScenarioResult read_scenario_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    std::string line;
    if (!std::getline(in, line)) throw DataError(path + ": empty file");
    if (line != "t,Fh_star,M1,N1,M2,N2,Td,disturbed")
        throw DataError(path + ": unexpected header '" + line + "'");

    ScenarioResult res;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string cell;
        double vals[7];
        for (double& v : vals) {
            if (!std::getline(ss, cell, ',')) throw DataError(path + ": short row");
            v = std::stod(cell);
        }
        if (!std::getline(ss, cell, ',')) throw DataError(path + ": short row");
        res.t.push_back(vals[0]);
        res.Fh_star.push_back(vals[1]);
        res.M1.push_back(vals[2]);
        res.N1.push_back(vals[3]);
        res.M2.push_back(vals[4]);
        res.N2.push_back(vals[5]);
        res.Td.push_back(vals[6]);
        res.disturbed = cell == "1";
    }
    return res;
}

}  // namespace teleop::sim
