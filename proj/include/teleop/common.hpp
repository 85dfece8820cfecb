#pragma once

#include <stdexcept>
#include <string>

namespace teleop {

// Error categories map to CLI exit codes: config 2, data 3, divergence 4.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class DataError : public std::runtime_error {
public:
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& msg, std::size_t step)
        : std::runtime_error(msg), step_index(step) {}
    std::size_t step_index;
};

}  // namespace teleop
