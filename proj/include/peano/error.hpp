#pragma once

#include <stdexcept>
#include <string>

namespace peano {

// Invalid arguments or parameter combinations outside the model's assumptions.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Non-finite state during integration; carries the process time of failure.
class NumericalFailure : public std::runtime_error {
public:
    NumericalFailure(const std::string& what, double time)
        : std::runtime_error(what + " at t=" + std::to_string(time)), time_(time) {}
    // Same failure with extra context (epsilon, path index) appended.
    NumericalFailure(const NumericalFailure& base, const std::string& context)
        : std::runtime_error(std::string(base.what()) + " (" + context + ")"), time_(base.time()) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

}  // namespace peano
