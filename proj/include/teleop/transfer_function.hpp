#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace teleop::sim {

// Continuous-time rational transfer function. Coefficients are stored in
// descending powers of s, e.g. {0.25, 0.8} is 0.25*s + 0.8.
struct RationalTF {
    std::vector<double> num;
    std::vector<double> den;

    RationalTF() : num{0.0}, den{1.0} {}
    RationalTF(std::vector<double> n, std::vector<double> d);

    static RationalTF gain(double g) { return RationalTF({g}, {1.0}); }
    // g + 1/s = (g*s + 1) / s
    static RationalTF pi(double g) { return RationalTF({g, 1.0}, {1.0, 0.0}); }

    std::size_t num_degree() const { return num.size() - 1; }
    std::size_t den_degree() const { return den.size() - 1; }
    bool proper() const { return num_degree() <= den_degree(); }

    RationalTF operator+(const RationalTF& other) const;
    RationalTF operator*(const RationalTF& other) const;
    RationalTF inverse() const;
    RationalTF scaled(double g) const;
};

// Polynomial helpers (descending-power coefficient vectors).
std::vector<double> poly_mul(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> poly_add(const std::vector<double>& a, const std::vector<double>& b);
std::vector<double> poly_trim(std::vector<double> p);

// Direct-form II transposed realization of a z-domain filter. After
// normalization a[0] == 1 and a.size() == b.size().
class DiscreteFilter {
public:
    DiscreteFilter() = default;
    DiscreteFilter(std::vector<double> b, std::vector<double> a, double dt);

    double step(double input);
    void reset();

    const std::vector<double>& num() const { return b_; }
    const std::vector<double>& den() const { return a_; }
    const std::vector<double>& state() const { return state_; }
    double dt() const { return dt_; }

private:
    std::vector<double> b_{1.0};
    std::vector<double> a_{1.0};
    std::vector<double> state_;
    double dt_ = 0.0;
};

// Bilinear (Tustin) mapping s <- (2/dt) * (z-1)/(z+1). Rejects improper
// transfer functions; `name` appears in the diagnostic.
DiscreteFilter discretize(const RationalTF& tf, double dt, const std::string& name = "tf");

}  // namespace teleop::sim
