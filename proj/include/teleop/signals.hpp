#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace teleop::data {

// Operator input-force shapes: step (0 until duration/10, amplitude after),
// sine, or a cubic spline through knots with clamped ends. When a spline has
// no explicit knots they are drawn from the seed.
struct SignalSpec {
    enum class Kind { step, sine, spline };
    Kind kind = Kind::step;
    double amplitude = 1.0;
    double frequency = 0.5;                       // Hz, sine only
    std::vector<std::pair<double, double>> knots;  // (t, value), spline only
    std::uint64_t seed = 0;
    double knot_period = 2.0;  // spacing of generated knots (s)

    static Kind parse_kind(const std::string& s);
    static std::string kind_name(Kind k);
};

std::vector<double> generate_input_signal(const SignalSpec& spec, double duration, double dt);

// Natural cubic interpolation through (x, y) knots; evaluation outside the
// knot range clamps to the end values.
class CubicSpline {
public:
    CubicSpline(std::vector<double> x, std::vector<double> y);
    double operator()(double t) const;

private:
    std::vector<double> x_, y_, m_;  // m_ = second derivatives at knots
};

}  // namespace teleop::data
