#pragma once

#include <stdexcept>
#include <string>

namespace cbimc {

// Bad user input: parameter constraints violated, malformed files, shape
// mismatches.  Maps to CLI exit code 2.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A numerical routine could not reach its target (quadrature stagnation,
// root bracketing failure, ODE breakdown, ...).  Maps to CLI exit code 3.
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Requested transform/moment does not exist for the given horizon: the
// underlying exponent ODE explodes before the requested time.
class LifetimeError : public NumericalError {
public:
    explicit LifetimeError(const std::string& msg) : NumericalError(msg) {}
};

} // namespace cbimc
