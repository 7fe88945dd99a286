#pragma once

#include <stdexcept>
#include <string>

namespace fermicrit {

// Configuration / precondition problems: the caller passed something invalid.
// The CLI maps these to exit code 1.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Mismatched grids between fields that must live on the same discretization.
struct DimensionError : ConfigError {
    explicit DimensionError(const std::string& msg) : ConfigError(msg) {}
};

// The input state is outside the mathematical domain of the requested
// operation (e.g. identically zero density where a normalization is needed).
struct DomainError : ConfigError {
    explicit DomainError(const std::string& msg) : ConfigError(msg) {}
};

// Numerical breakdowns detected at run time. The CLI maps these to exit code 2.
struct NumericalError : std::runtime_error {
    explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Gram matrix (numerically) singular; carries the offending eigenvalue.
struct RankDeficiencyError : NumericalError {
    RankDeficiencyError(const std::string& msg, double eigenvalue)
        : NumericalError(msg), gram_eigenvalue(eigenvalue) {}
    double gram_eigenvalue;
};

// A field feature fell below the resolvable scale of its grid.
struct ResolutionError : NumericalError {
    explicit ResolutionError(const std::string& msg) : NumericalError(msg) {}
};

// A diagnostic (tail fit, identity check) cannot be computed meaningfully.
struct DiagnosticError : NumericalError {
    explicit DiagnosticError(const std::string& msg) : NumericalError(msg) {}
};

// An API contract was violated by the caller (programming error, not data).
struct ContractViolation : std::logic_error {
    explicit ContractViolation(const std::string& msg) : std::logic_error(msg) {}
};

}  // namespace fermicrit
