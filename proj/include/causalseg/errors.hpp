#pragma once

#include <stdexcept>
#include <string>

namespace causalseg {

// Error taxonomy maps onto CLI exit codes:
//   ConfigError -> 2, ValidationError -> 3, NumericalError -> 4.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct ValidationError : Error {
    using Error::Error;
};

// Malformed input data (bad cell, bad header). Carries row context in the message.
struct ParseError : ValidationError {
    using ValidationError::ValidationError;
};

struct NumericalError : Error {
    using Error::Error;
};

struct ConvergenceError : NumericalError {
    ConvergenceError(const std::string& msg, double gradient_norm)
        : NumericalError(msg), last_gradient_norm(gradient_norm) {}
    double last_gradient_norm;
};

}  // namespace causalseg
