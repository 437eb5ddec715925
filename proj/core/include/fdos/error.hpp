#pragma once

#include <stdexcept>
#include <string>

namespace fdos {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An argument lies outside the domain an operation is defined on.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Matrix or vector dimensions do not agree.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// Invalid configuration value (penalties, fold counts, degrees, ...).
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A factorization or solve failed even after regularization.
class NumericalError : public Error {
public:
    using Error::Error;
};

/// Malformed input file; the message carries the offending line.
class ParseError : public Error {
public:
    using Error::Error;
};

} // namespace fdos
