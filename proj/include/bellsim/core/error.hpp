#pragma once

#include <stdexcept>
#include <string>

namespace bellsim {

/// Caller violated an operation's precondition (bad argument, missing setting, ...).
class PreconditionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine could not proceed (singular solve, empty estimator, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Configuration document could not be parsed or is inconsistent.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define BELLSIM_REQUIRE(cond, ExcType, msg)        \
    do {                                           \
        if (!(cond)) throw ExcType(std::string(msg)); \
    } while (0)

}  // namespace bellsim
