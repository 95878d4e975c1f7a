#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input violates a structural precondition (non-Hermitian H, bad initial frames, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

class DimensionError : public Error {
public:
    using Error::Error;
};

class RangeError : public Error {
public:
    using Error::Error;
};

/// Model configuration outside the supported regime (e.g. non-commuting dephasing coupling).
class ConfigurationError : public Error {
public:
    using Error::Error;
};

/// Integrator blow-up; `step` is the first grid step whose state exceeded the bound.
class DivergenceError : public Error {
public:
    DivergenceError(const std::string& what, std::size_t step) : Error(what), step_(step) {}
    std::size_t step() const noexcept { return step_; }

private:
    std::size_t step_;
};

/// No memory cutoff satisfies the tolerance inside the learning window.
class InsufficientLearning : public Error {
public:
    InsufficientLearning(const std::string& what, std::vector<double> tail_norms)
        : Error(what), tail_norms_(std::move(tail_norms)) {}
    const std::vector<double>& tail_norms() const noexcept { return tail_norms_; }

private:
    std::vector<double> tail_norms_;
};

class NotSettled : public Error {
public:
    NotSettled(const std::string& what, double residual) : Error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

class DegenerateState : public Error {
public:
    using Error::Error;
};

/// Malformed file; `field` names the offending JSON path.
class SchemaError : public Error {
public:
    SchemaError(const std::string& what, std::string field)
        : Error(what + " [field: " + field + "]"), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

}  // namespace ttm
