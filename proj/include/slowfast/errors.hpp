#pragma once

#include <stdexcept>
#include <string>

namespace slowfast {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad user input: parameters, windows, preconditions.
struct DomainError : Error {
    using Error::Error;
};

// Numerics gave up: step-size underflow, non-finite values, no convergence.
struct NumericError : Error {
    using Error::Error;
};

// Config file problems; carries the offending key path in the message.
struct ConfigError : Error {
    using Error::Error;
};

} // namespace slowfast
