#pragma once

#include <stdexcept>
#include <string>

namespace inflatelab {

// Exit codes used by the command-line front end.
enum class ExitCode : int {
    success = 0,
    failure = 1,
    config_error = 2,
    resource_error = 3,
    numerical_guard = 4,
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual ExitCode exit_code() const noexcept { return ExitCode::failure; }
};

/// Dimension/scale mismatch, bad axis, arity mismatch.
class StructuralError : public Error {
public:
    using Error::Error;
};

/// Operation invoked on a value that does not satisfy its precondition.
class UsageError : public Error {
public:
    using Error::Error;
};

/// Enumeration cap exceeded, integer range exhausted, grid too large.
class ResourceError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::resource_error; }
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t position)
        : Error(what + " (at position " + std::to_string(position) + ")"), position_(position) {}
    std::size_t position() const noexcept { return position_; }
    ExitCode exit_code() const noexcept override { return ExitCode::config_error; }

private:
    std::size_t position_;
};

/// Invalid configuration or parameters outside the admissible window.
class ConfigError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::config_error; }
};

/// Blow-up guard tripped, or a value left the regime where the computation is meaningful.
class NumericalGuardError : public Error {
public:
    using Error::Error;
    ExitCode exit_code() const noexcept override { return ExitCode::numerical_guard; }
};

}  // namespace inflatelab
