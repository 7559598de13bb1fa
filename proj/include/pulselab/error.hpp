#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace pulselab {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input: unknown model, missing or non-positive parameter, malformed config.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// A numerical routine could not produce its result.
class NumericalError : public Error {
public:
    using Error::Error;
};

class StepTooLarge : public NumericalError {
public:
    StepTooLarge(double h, double delay)
        : NumericalError("step h=" + std::to_string(h) + " exceeds delay T=" + std::to_string(delay) +
                         "; delayed lookup impossible") {}
};

class NonFiniteState : public NumericalError {
public:
    explicit NonFiniteState(double t)
        : NumericalError("non-finite state at t=" + std::to_string(t)), time_(t) {}
    [[nodiscard]] double time() const noexcept { return time_; }

private:
    double time_;
};

class OutOfRange : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Too few peaks to call the trace periodic.
class NotPeriodic : public NumericalError {
public:
    using NumericalError::NumericalError;
};

/// Bracket without sign change, or an equilibrium that does not exist on this side of the threshold.
class NoRoot : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NewtonFailure : public NumericalError {
public:
    NewtonFailure(const std::string& what, double residual)
        : NumericalError(what + " (last residual " + std::to_string(residual) + ")"), residual_(residual) {}
    [[nodiscard]] double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Newton seeding found a different number of roots than the argument principle predicts.
class WindingMismatch : public NumericalError {
public:
    WindingMismatch(std::size_t found, long winding)
        : NumericalError("root count mismatch: Newton found " + std::to_string(found) +
                         ", winding number gives " + std::to_string(winding) + " (grid too coarse?)"),
          found_(found), winding_(winding) {}
    [[nodiscard]] std::size_t found() const noexcept { return found_; }
    [[nodiscard]] long winding() const noexcept { return winding_; }

private:
    std::size_t found_;
    long winding_;
};

class NoHeteroclinic : public NumericalError {
public:
    using NumericalError::NumericalError;
};

}  // namespace pulselab
