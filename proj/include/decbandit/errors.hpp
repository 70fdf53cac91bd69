#pragma once

#include <stdexcept>
#include <string>

namespace decbandit {

// Status codes shared with the C API and the CLI exit codes.
enum class Status : int {
    Ok = 0,
    ConfigError = 1,
    InvariantViolation = 2,
    RuntimeFailure = 3,
};

class Error : public std::runtime_error {
public:
    Error(Status status, const std::string& what) : std::runtime_error(what), status_(status) {}
    Status status() const noexcept { return status_; }

private:
    Status status_;
};

class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(Status::ConfigError, what) {}
};

class InvariantError : public Error {
public:
    explicit InvariantError(const std::string& what) : Error(Status::InvariantViolation, what) {}
};

class RunError : public Error {
public:
    explicit RunError(const std::string& what) : Error(Status::RuntimeFailure, what) {}
};

}  // namespace decbandit
