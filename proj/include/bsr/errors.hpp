#pragma once

#include <stdexcept>
#include <string>

namespace bsr {

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Input too small or otherwise structurally unusable (empty vector, order 0, ...).
struct DegenerateInputError : std::invalid_argument {
    explicit DegenerateInputError(const std::string& what) : std::invalid_argument(what) {}
};

/// Inconsistent configuration (empty hyperparameter intervals, impossible bounds, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Autocorrelation requested for a series with zero variance.
struct UndefinedAcfError : std::runtime_error {
    explicit UndefinedAcfError(const std::string& what) : std::runtime_error(what) {}
};

/// File I/O failure, carries the offending path in the message.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bsr
