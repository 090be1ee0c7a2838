#ifndef OSMOSIS_ERRORS_HPP
#define OSMOSIS_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace osmosis {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid input data: shape mismatches, broken invariants, bad parameters.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// File format and filesystem failures.
class IoError : public Error {
public:
    using Error::Error;
};

/// Iterative linear solver did not reach the requested residual.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual, int iterations)
        : Error(what), residual(residual), iterations(iterations) {}

    double residual;  // relative residual after the last iteration
    int iterations;
};

/// Explicit time step exceeds the positivity/stability bound.
class StepSizeError : public Error {
public:
    StepSizeError(const std::string& what, double tau_max)
        : Error(what), tau_max(tau_max) {}

    double tau_max;  // largest admissible step reported to the caller
};

}  // namespace osmosis

#endif  // OSMOSIS_ERRORS_HPP
