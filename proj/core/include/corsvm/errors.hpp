#pragma once

#include <stdexcept>
#include <string>

namespace corsvm {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input file (CSV/JSON). Messages name the offending line.
class ParseError : public Error {
public:
    using Error::Error;
};

/// Incompatible vector/matrix dimensions.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Unknown class id or index out of range.
class LookupError : public Error {
public:
    using Error::Error;
};

/// Too little data for the requested operation (N, M bounds).
class SizeError : public Error {
public:
    using Error::Error;
};

/// Iterative solver ran out of iterations. Carries the last residual
/// (gradient norm for Newton, KKT violation for SMO).
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double residual)
        : Error(what), residual_(residual) {}

    double residual() const { return residual_; }

private:
    double residual_;
};

}  // namespace corsvm
