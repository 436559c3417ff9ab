#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace kanopf {

// Root of every error raised by the library. The CLI maps the subclasses
// below onto process exit codes (config 2, numeric 3, I/O 4).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class ShapeError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class SpecError : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class ConnectivityError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class DivergenceError : public NumericError {
public:
    DivergenceError(const std::string& what, int iterations, double residual)
        : NumericError(what), iterations_(iterations), residual_(residual) {}

    int iterations() const noexcept { return iterations_; }
    double residual() const noexcept { return residual_; }

private:
    int iterations_;
    double residual_;
};

class SingularJacobianError : public NumericError {
public:
    using NumericError::NumericError;
};

class InfeasibleError : public NumericError {
public:
    InfeasibleError(const std::string& what, double worst_violation)
        : NumericError(what), worst_violation_(worst_violation) {}

    double worst_violation() const noexcept { return worst_violation_; }

private:
    double worst_violation_;
};

class TrainingDivergedError : public NumericError {
public:
    TrainingDivergedError(const std::string& what, std::size_t step)
        : NumericError(what), step_(step) {}

    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

}  // namespace kanopf
