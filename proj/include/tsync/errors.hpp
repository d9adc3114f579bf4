#pragma once

#include <stdexcept>
#include <string>

namespace tsync {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// Raised by operations that divide by (v2 - v1).
class DegenerateVelocities : public Error {
public:
    DegenerateVelocities() : Error("degenerate velocities: operation requires v2 > v1") {}
};

class NumericalInstability : public Error {
public:
    using Error::Error;
};

class CflViolation : public Error {
public:
    using Error::Error;
};

class AliasingError : public Error {
public:
    using Error::Error;
};

class OutflowError : public Error {
public:
    using Error::Error;
};

class TailMassError : public Error {
public:
    using Error::Error;
};

class ConditioningError : public Error {
public:
    using Error::Error;
};

class FitError : public Error {
public:
    using Error::Error;
};

/// Malformed or invalid scenario configuration. `line` is 1-based, 0 when unknown.
class ConfigError : public Error {
public:
    ConfigError(const std::string& message, int line)
        : Error(message), line_(line)
    {
    }
    int line() const noexcept { return line_; }

private:
    int line_ = 0;
};

} // namespace tsync
