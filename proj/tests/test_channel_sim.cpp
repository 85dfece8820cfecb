#include <algorithm>
#include <cmath>
#include <filesystem>
#include <vector>

#include "doctest.h"
#include "teleop/channel_sim.hpp"
#include "teleop/common.hpp"
#include "teleop/disturbance.hpp"
#include "teleop/rng.hpp"
#include "teleop/signals.hpp"
#include "teleop/transfer_function.hpp"
#include "teleop/wave.hpp"

using namespace teleop;
using namespace teleop::sim;

TEST_CASE("tustin integrator equals trapezoidal cumulative sum") {
    const double dt = 0.01;
    DiscreteFilter f = discretize(RationalTF({1.0}, {1.0, 0.0}), dt, "1/s");

    // Independent oracle: trapezoidal integration of the same input.
    Rng rng(7);
    std::vector<double> input(10000);
    for (double& v : input) v = rng.uniform(-2.0, 2.0);

    double acc = 0.0, prev = 0.0;
    double max_err = 0.0;
    for (std::size_t k = 0; k < input.size(); ++k) {
        acc += 0.5 * dt * (prev + input[k]);
        prev = input[k];
        max_err = std::max(max_err, std::abs(f.step(input[k]) - acc));
    }
    CHECK(max_err < 1e-12);
}

TEST_CASE("tustin integrator on a constant input") {
    const double dt = 0.01;
    DiscreteFilter f = discretize(RationalTF({1.0}, {1.0, 0.0}), dt, "1/s");
    for (int k = 0; k <= 500; ++k) {
        const double y = f.step(1.0);
        CHECK(std::abs(y - 0.01 * k) <= 0.005 + 1e-12);
    }
}

TEST_CASE("pure gain discretizes to the identity scaled") {
    DiscreteFilter f = discretize(RationalTF::gain(2.5), 0.01, "gain");
    for (double x : {0.0, 1.0, -3.0, 0.125}) {
        CHECK(f.step(x) == doctest::Approx(2.5 * x).epsilon(1e-15));
    }
}

TEST_CASE("PI block matches analytic step response") {
    // Cm = 0.0449 + 1/s driven by a unit step. Under trapezoidal integration
    // a sampled step behaves as if the jump happened half a sample early, so
    // the analytic response is evaluated at t + dt/2.
    const double dt = 0.01;
    DiscreteFilter f = discretize(RationalTF::pi(0.0449), dt, "Cm");
    double y = 0.0;
    for (int k = 0; k <= 100; ++k) y = f.step(1.0);
    const double analytic = 0.0449 + (1.0 + 0.5 * dt);
    CHECK(std::abs(y - analytic) < 1e-3);
}

TEST_CASE("improper transfer function is rejected with the block name") {
    CHECK_THROWS_WITH_AS(discretize(RationalTF({0.25, 0.8}, {1.0}), 0.01, "Zm"),
                         doctest::Contains("Zm"), ConfigError);
}

TEST_CASE("discrete filter invariants") {
    DiscreteFilter f = discretize(RationalTF({1.0, 2.0}, {1.0, 3.0, 1.0}), 0.02, "tf");
    CHECK(f.num().size() == f.den().size());
    CHECK(f.den()[0] == 1.0);

    for (int k = 0; k < 5; ++k) f.step(1.0);
    f.reset();
    for (int k = 0; k < 50; ++k) CHECK(f.step(0.0) == 0.0);
}

TEST_CASE("wave transform zero case and direct evaluation") {
    const WaveParams p2{2.0};
    auto [u0, w0] = wave_encode(0.0, 0.0, p2);
    CHECK(u0 == 0.0);
    CHECK(w0 == 0.0);

    // F = 2, v = 1, b = 2: u = (2*1 + 2)/sqrt(4) = 2, w = (2*1 - 2)/sqrt(4) = 0.
    auto [u, w] = wave_encode(2.0, 1.0, p2);
    CHECK(u == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(w == doctest::Approx(0.0).epsilon(1e-15));

    auto fv = wave_decode({2.0, 0.0}, p2);
    CHECK(fv.force == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(fv.velocity == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("wave power identity holds for random triples") {
    Rng rng(11);
    const WaveParams paper{62.1208};
    auto [u, w] = wave_encode(2.0, 1.0, paper);
    CHECK(0.5 * (u * u - w * w) == doctest::Approx(2.0).epsilon(1e-12));

    for (int i = 0; i < 10000; ++i) {
        const double f = rng.uniform(-50.0, 50.0);
        const double v = rng.uniform(-5.0, 5.0);
        const WaveParams p{rng.uniform(0.1, 100.0)};
        auto [uu, ww] = wave_encode(f, v, p);
        CHECK(std::abs(f * v - 0.5 * (uu * uu - ww * ww)) < 1e-12 * std::max(1.0, std::abs(f * v)));
    }
}

TEST_CASE("wave encode and decode are mutually inverse") {
    Rng rng(13);
    const WaveParams p{62.1208};
    double max_err = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double f = rng.uniform(-100.0, 100.0);
        const double v = rng.uniform(-10.0, 10.0);
        const auto fv = wave_decode(wave_encode(f, v, p), p);
        max_err = std::max({max_err, std::abs(fv.force - f), std::abs(fv.velocity - v)});
    }
    CHECK(max_err < 1e-12);
}

TEST_CASE("delay profile with zero variance is constant") {
    DelayConfig cfg;
    cfg.base_delay = 0.1;
    cfg.variance = 0.0;
    cfg.seed = 3;
    const DelayProfile p = generate_delay_profile(cfg, 20.0);
    for (double s : p.samples) CHECK(s == 0.1);
}

TEST_CASE("delay profile has one segment per sample period") {
    DelayConfig cfg;
    cfg.base_delay = 0.1;
    cfg.variance = 0.001;
    cfg.sample_period = 2.0;
    cfg.seed = 5;
    const DelayProfile p = generate_delay_profile(cfg, 20.0);
    CHECK(p.samples.size() == 10);
    // All segment values distinct (continuous draws).
    for (std::size_t i = 0; i + 1 < p.samples.size(); ++i) {
        CHECK(p.samples[i] != p.samples[i + 1]);
    }
    // Piecewise-constant evaluation.
    CHECK(p.at(0.0) == p.samples[0]);
    CHECK(p.at(1.999) == p.samples[0]);
    CHECK(p.at(2.0) == p.samples[1]);
    CHECK(p.at(1e9) == p.samples.back());
}

TEST_CASE("delay profile jitter matches the configured variance") {
    DelayConfig cfg;
    cfg.base_delay = 0.5;  // far from the clamp bounds
    cfg.variance = 0.001;
    cfg.sample_period = 2.0;
    cfg.seed = 17;
    const DelayProfile p = generate_delay_profile(cfg, 2.0 * 10000);
    REQUIRE(p.samples.size() == 10000);
    double mean = 0.0;
    for (double s : p.samples) mean += s;
    mean /= static_cast<double>(p.samples.size());
    double var = 0.0;
    for (double s : p.samples) var += (s - mean) * (s - mean);
    var /= static_cast<double>(p.samples.size());
    const double sd = std::sqrt(var);
    CHECK(sd == doctest::Approx(std::sqrt(0.001)).epsilon(0.05));
}

TEST_CASE("negative delay variance is rejected") {
    DelayConfig cfg;
    cfg.variance = -1.0;
    CHECK_THROWS_AS(generate_delay_profile(cfg, 1.0), ConfigError);
}

TEST_CASE("noise generator honors the power convention") {
    NoiseConfig cfg;
    cfg.power = 0.0;
    for (double v : generate_noise(cfg, 10.0, 0.01)) CHECK(v == 0.0);

    cfg.power = 1.0;
    cfg.sample_period = 0.1;
    cfg.seed = 23;
    const auto series = generate_noise(cfg, 10000.0, 0.1);
    REQUIRE(series.size() == 100000);
    double mean = 0.0;
    for (double v : series) mean += v;
    mean /= static_cast<double>(series.size());
    double var = 0.0;
    for (double v : series) var += (v - mean) * (v - mean);
    var /= static_cast<double>(series.size());
    CHECK(var == doctest::Approx(10.0).epsilon(0.05));
}

TEST_CASE("noise generator is deterministic for a fixed seed") {
    NoiseConfig cfg;
    cfg.power = 1.0;
    cfg.sample_period = 0.1;
    cfg.seed = 99;
    const auto a = generate_noise(cfg, 5.0, 0.01);
    const auto b = generate_noise(cfg, 5.0, 0.01);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
}

TEST_CASE("variable delay reproduces shifted and interpolated ramps") {
    const double dt = 0.01;
    std::vector<double> ramp(200);
    for (std::size_t k = 0; k < ramp.size(); ++k) ramp[k] = static_cast<double>(k) * dt;

    SUBCASE("zero delay is the identity") {
        const auto out = apply_variable_delay(ramp, DelayProfile::constant(0.0, 2.0), dt);
        for (std::size_t k = 0; k < ramp.size(); ++k) CHECK(out[k] == ramp[k]);
    }
    SUBCASE("integer-step delay shifts the ramp") {
        const auto out = apply_variable_delay(ramp, DelayProfile::constant(3.0 * dt, 2.0), dt);
        for (std::size_t k = 3; k < ramp.size(); ++k) {
            CHECK(out[k] == doctest::Approx((static_cast<double>(k) - 3.0) * dt).epsilon(1e-12));
        }
        CHECK(out[0] == 0.0);
    }
    SUBCASE("fractional delay interpolates linearly") {
        const auto out = apply_variable_delay(ramp, DelayProfile::constant(1.5 * dt, 2.0), dt);
        for (std::size_t k = 2; k < ramp.size(); ++k) {
            CHECK(out[k] == doctest::Approx((static_cast<double>(k) - 1.5) * dt).epsilon(1e-12));
        }
    }
}

TEST_CASE("zero operator input keeps every signal at zero") {
    PlantConfig cfg;
    cfg.duration = 5.0;
    const std::vector<double> input(500, 0.0);
    const ScenarioResult res = simulate_scenario(cfg, input);
    for (std::size_t k = 0; k < res.t.size(); ++k) {
        CHECK(res.M1[k] == 0.0);
        CHECK(res.N1[k] == 0.0);
        CHECK(res.M2[k] == 0.0);
        CHECK(res.N2[k] == 0.0);
    }
}

TEST_CASE("nominal plant stays bounded under a step input") {
    PlantConfig cfg;
    cfg.duration = 60.0;
    data::SignalSpec spec;
    spec.kind = data::SignalSpec::Kind::step;
    spec.amplitude = 1.0;
    const auto input = data::generate_input_signal(spec, cfg.duration, cfg.dt);
    const ScenarioResult res = simulate_scenario(cfg, input);  // throws on divergence
    double max_mag = 0.0;
    for (std::size_t k = 0; k < res.t.size(); ++k) {
        max_mag = std::max({max_mag, std::abs(res.M1[k]), std::abs(res.N1[k]),
                            std::abs(res.M2[k]), std::abs(res.N2[k])});
    }
    CHECK(max_mag > 0.0);
    CHECK(max_mag < 1e3);
}

TEST_CASE("scenario runs are bit-identical for identical seeds") {
    PlantConfig cfg;
    cfg.duration = 4.0;
    data::SignalSpec spec;
    spec.kind = data::SignalSpec::Kind::sine;
    spec.amplitude = 5.0;
    spec.frequency = 0.5;
    const auto input = data::generate_input_signal(spec, cfg.duration, cfg.dt);

    Disturbance d;
    DelayConfig dc;
    dc.seed = 41;
    d.delay = generate_delay_profile(dc, cfg.duration);
    d.noise_m1 = {1.0, 0.1, 42};
    d.noise_n2 = {1.0, 0.1, 43};

    const ScenarioResult a = simulate_scenario(cfg, input, d);
    const ScenarioResult b = simulate_scenario(cfg, input, d);
    REQUIRE(a.t.size() == b.t.size());
    for (std::size_t k = 0; k < a.t.size(); ++k) {
        CHECK(a.M1[k] == b.M1[k]);
        CHECK(a.N1[k] == b.N1[k]);
        CHECK(a.M2[k] == b.M2[k]);
        CHECK(a.N2[k] == b.N2[k]);
        CHECK(a.Td[k] == b.Td[k]);
    }
}

TEST_CASE("constant-delay channel is passive at every step") {
    PlantConfig cfg;
    cfg.duration = 20.0;
    cfg.nominal_delay = 0.2;
    data::SignalSpec spec;
    spec.kind = data::SignalSpec::Kind::step;
    spec.amplitude = 1.0;
    const auto input = data::generate_input_signal(spec, cfg.duration, cfg.dt);
    const ScenarioResult res = simulate_scenario(cfg, input);

    const auto margin = channel_energy_margin(res, cfg.wave);
    double worst = 0.0;
    for (double m : margin) worst = std::min(worst, m);
    CHECK(worst >= -1e-9);

    const auto bal = channel_energy_balance(res, cfg.wave);
    CHECK(bal.e_in - bal.e_out >= -1e-9);
    CHECK(bal.e_in > 0.0);
}

TEST_CASE("energy balance bookkeeping") {
    SUBCASE("all-zero scenario has zero energy") {
        ScenarioResult res;
        res.t = {0.0, 0.01, 0.02};
        res.Fh_star = res.M1 = res.N1 = res.M2 = res.N2 = {0.0, 0.0, 0.0};
        res.Td = {0.0, 0.0, 0.0};
        const auto bal = channel_energy_balance(res, WaveParams{62.1208});
        CHECK(bal.e_in == 0.0);
        CHECK(bal.e_out == 0.0);
    }
    SUBCASE("a zero-delay channel stores nothing") {
        // Outputs equal inputs sample for sample, so the integrals agree.
        const double dt = 0.01;
        Rng rng(29);
        ScenarioResult res;
        for (int k = 0; k < 500; ++k) {
            res.t.push_back(k * dt);
            res.Fh_star.push_back(0.0);
            res.M1.push_back(rng.uniform(-3.0, 3.0));
            res.N2.push_back(rng.uniform(-3.0, 3.0));
            res.Td.push_back(0.0);
        }
        res.N1 = apply_variable_delay(res.M1, DelayProfile::constant(0.0, 5.0), dt);
        res.M2 = apply_variable_delay(res.N2, DelayProfile::constant(0.0, 5.0), dt);
        const auto bal = channel_energy_balance(res, WaveParams{62.1208});
        CHECK(std::abs(bal.e_in - bal.e_out) < 1e-9);
    }
}

TEST_CASE("scenario CSV round-trips") {
    PlantConfig cfg;
    cfg.duration = 1.0;
    data::SignalSpec spec;
    spec.kind = data::SignalSpec::Kind::sine;
    spec.amplitude = 2.0;
    const auto input = data::generate_input_signal(spec, cfg.duration, cfg.dt);
    const ScenarioResult res = simulate_scenario(cfg, input);

    const auto path = std::filesystem::temp_directory_path() / "teleop_scenario_test.csv";
    write_scenario_csv(res, path.string());
    const ScenarioResult back = read_scenario_csv(path.string());
    std::filesystem::remove(path);

    REQUIRE(back.t.size() == res.t.size());
    for (std::size_t k = 0; k < res.t.size(); ++k) {
        CHECK(back.M1[k] == res.M1[k]);
        CHECK(back.N1[k] == res.N1[k]);
        CHECK(back.M2[k] == res.M2[k]);
        CHECK(back.N2[k] == res.N2[k]);
        CHECK(back.Td[k] == res.Td[k]);
    }
    CHECK(back.disturbed == res.disturbed);
}

TEST_CASE("divergence is reported with the offending step") {
    PlantConfig cfg;
    cfg.duration = 2.0;
    cfg.overflow_limit = 1e-6;  // absurd bound to force the guard
    data::SignalSpec spec;
    spec.kind = data::SignalSpec::Kind::step;
    spec.amplitude = 100.0;
    const auto input = data::generate_input_signal(spec, cfg.duration, cfg.dt);
    CHECK_THROWS_AS(simulate_scenario(cfg, input), DivergenceError);
}
