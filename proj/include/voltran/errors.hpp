#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace voltran {

/// Base class for every recoverable failure raised by the engine.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid user configuration; `field()` names the offending entry.
class ConfigError : public Error {
public:
    ConfigError(std::string field, const std::string& message)
        : Error(field + ": " + message), field_(std::move(field)) {}

    [[nodiscard]] const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Argument outside the mathematical domain of a function (e.g. negative variance).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Valid request for something the engine deliberately does not support.
class UnsupportedFeature : public Error {
public:
    using Error::Error;
};

/// Numerical failure inside a backward sweep.
class SolverError : public Error {
public:
    SolverError(const std::string& message, std::size_t step, double residual)
        : Error(message + " (step " + std::to_string(step) + ", residual "
                + std::to_string(residual) + ")"),
          step_(step), residual_(residual) {}

    [[nodiscard]] std::size_t step() const noexcept { return step_; }
    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    std::size_t step_;
    double residual_;
};

/// Programming error: arguments that violate a documented precondition.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

}  // namespace voltran
