#pragma once

#include <stdexcept>
#include <string>

namespace autoopt {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Schema violation while reading a document. `path()` is a JSON-pointer-like
/// location such as `/widgets/2/width`.
class ParseError : public Error {
public:
    ParseError(std::string path, const std::string& message)
        : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

/// Precondition on a numeric or geometric argument does not hold.
class DomainError : public Error {
public:
    using Error::Error;
};

/// An OptimizationSpec cannot be turned into a problem instance.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Objective or constraint evaluation failed (e.g. non-finite position).
class EvaluationError : public Error {
public:
    using Error::Error;
};

/// Failure of an agent backend. `status()` carries the HTTP status for remote
/// backends, 0 for transport failures and timeouts.
class AgentError : public Error {
public:
    explicit AgentError(const std::string& message, int status = 0)
        : Error(message), status_(status) {}

    int status() const noexcept { return status_; }

private:
    int status_;
};

/// Operation not permitted in the session's current phase.
class StateError : public Error {
public:
    using Error::Error;
};

class NotFoundError : public Error {
public:
    using Error::Error;
};

}  // namespace autoopt
