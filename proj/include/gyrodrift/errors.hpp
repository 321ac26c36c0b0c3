#pragma once
/// @file errors.hpp
/// @brief Error types thrown by the solver and harness.

#include <stdexcept>
#include <string>
#include <vector>

namespace gyrodrift {

struct GyroError : std::runtime_error {
    explicit GyroError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Bad or inconsistent configuration / arguments.
struct ConfigError : GyroError {
    using GyroError::GyroError;
};

/// Charge density handed to the field solver is not globally neutral.
struct NeutralityError : GyroError {
    using GyroError::GyroError;
};

/// Mass left the trusted interior of the spatial box.
struct SupportBreachError : GyroError {
    using GyroError::GyroError;
};

/// Non-finite values or negatives beyond the instability threshold.
struct InstabilityError : GyroError {
    using GyroError::GyroError;
};

/// Fixed-point field iteration failed to converge; carries the residuals.
struct PicardError : GyroError {
    std::vector<double> residual_history;
    PicardError(const std::string& msg, std::vector<double> hist)
        : GyroError(msg), residual_history(std::move(hist)) {}
};

/// Binary field file problems (magic, truncation, dimension overflow).
struct IoError : GyroError {
    using GyroError::GyroError;
};

} // namespace gyrodrift
