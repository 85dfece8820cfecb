#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>

#include "teleop/learners/window_data.hpp"

#include "json.hpp"

namespace teleop::learn {

// Common fit/predict contract for the level-0 learners. predict before fit
// is an error; predict after fit is deterministic.
class BaseLearner {
public:
    virtual ~BaseLearner() = default;

    void fit(const WindowData& data, std::uint64_t seed);
    Eigen::MatrixXd predict(const WindowData& data) const;  // n x 2

    virtual std::string kind() const = 0;
    virtual nlohmann::json save() const = 0;
    virtual void load(const nlohmann::json& j) = 0;

    bool trained() const { return trained_; }

protected:
    virtual void do_fit(const WindowData& data, std::uint64_t seed) = 0;
    virtual Eigen::MatrixXd do_predict(const WindowData& data) const = 0;
    bool trained_ = false;
};

using LearnerFactory = std::function<std::unique_ptr<BaseLearner>()>;

}  // namespace teleop::learn
