#pragma once

#include <stdexcept>
#include <string>

namespace grushin {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite or out-of-range argument.
class DomainError : public Error {
public:
    using Error::Error;
};

/// A documented precondition (grid size, quadrature box, ...) does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// The requested operation is not available for this kernel kind.
class UnsupportedError : public Error {
public:
    using Error::Error;
};

/// A numerical computation degenerated (zero variance, underflow, ...).
class DegenerateError : public Error {
public:
    using Error::Error;
};

/// Picard iteration failed to contract.
class NonContractionError : public Error {
public:
    NonContractionError(const std::string& what, double lambda)
        : Error(what), lambda_(lambda) {}
    double lambda() const noexcept { return lambda_; }

private:
    double lambda_;
};

}  // namespace grushin
