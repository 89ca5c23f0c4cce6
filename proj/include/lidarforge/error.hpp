#pragma once

#include <stdexcept>
#include <string>

namespace lidarforge {

/// Raised for invalid inputs or configuration (CLI maps it to exit code 1).
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when a well-formed request cannot be completed (exit code 2).
class RuntimeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace lidarforge
