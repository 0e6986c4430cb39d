#pragma once

#include <stdexcept>
#include <string>

namespace pialab {

/// Base for every error raised by the library. `module()` names the
/// subsystem that raised it so that front ends can tag messages.
class Error : public std::runtime_error {
public:
    Error(std::string module, const std::string& what)
        : std::runtime_error(what), module_(std::move(module)) {}

    [[nodiscard]] const std::string& module() const noexcept { return module_; }

private:
    std::string module_;
};

/// Invalid problem, grid, or oracle configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// Fields or grids whose shapes do not match.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Caller violated an operation's precondition.
class UsageError : public Error {
public:
    using Error::Error;
};

/// A coefficient handle returned a non-finite value.
class CoefficientError : public Error {
public:
    CoefficientError(std::string module, const std::string& what, double t, double x)
        : Error(std::move(module), what), t_(t), x_(x) {}

    [[nodiscard]] double t() const noexcept { return t_; }
    [[nodiscard]] double x() const noexcept { return x_; }

private:
    double t_;
    double x_;
};

/// Linear algebra breakdown (zero pivot).
class SolverError : public Error {
public:
    using Error::Error;
};

/// An inner iteration ran out of budget. Carries the worst residual seen.
class ConvergenceError : public Error {
public:
    ConvergenceError(std::string module, const std::string& what, double residual)
        : Error(std::move(module), what), residual_(residual) {}

    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// A rate fit found no contracting prefix in the error sequence.
class NoPreFloorRegime : public Error {
public:
    using Error::Error;
};

} // namespace pialab
