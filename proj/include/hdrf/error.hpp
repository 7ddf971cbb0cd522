#pragma once

#include <stdexcept>
#include <string>

namespace hdrf {

/// Base of every error raised by the toolkit. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or unsupported file content.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Out-of-range argument or configuration value.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Dataset-level problem: missing inputs, shortfalls, degenerate statistics.
class DataError : public Error {
public:
    using Error::Error;
};

/// NaN/Inf encountered during a numerical procedure.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace hdrf
