#pragma once

#include <stdexcept>
#include <string>

namespace volterra {

/// Argument outside the mathematical domain of an operation (t < 0, θ ∉ (0,1], p < 1, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid or inconsistent configuration: bad measure, grid mismatch, degenerate step, empty suite.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A user-supplied function produced a non-finite value at a quadrature node.
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace volterra
