#pragma once

#include <stdexcept>
#include <string>

namespace mfg {

/// Base of every error raised by the library. Callers that only need a
/// message can catch this; the CLI maps the concrete type to an exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value outside the domain of an operation (non-finite integrand,
/// weights that do not sum to one, a parameter out of range).
class DomainError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

/// Random variables defined on different sample spaces were combined.
class CouplingError : public Error {
public:
    using Error::Error;
};

/// A search interval did not contain what it had to, even after widening.
class BracketError : public Error {
public:
    using Error::Error;
};

class PreconditionError : public Error {
public:
    using Error::Error;
};

/// An operation needing a derivative was asked to evaluate at a declared kink.
class KinkError : public Error {
public:
    using Error::Error;
};

class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace mfg
