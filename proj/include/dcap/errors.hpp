#pragma once

#include <stdexcept>
#include <string>

namespace dcap {

/// Argument outside the domain where a coefficient is defined.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Evaluation at a point where the coefficient is infinite (e.g. P_c' at s = 0).
class SingularityError : public DomainError {
public:
    using DomainError::DomainError;
};

/// Parameter combination the requested formula cannot handle.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Iterative numerics that failed to converge or produced non-finite values.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class MeshError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Configuration parse/validation failure; `what()` carries the location.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dcap
