#ifndef TW_ERRORS_HPP
#define TW_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace tw {

// Base class for all errors thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Bad configuration input (unknown key, missing key, out-of-range value).
// CLI exit code 2.
struct ConfigError : Error {
    using Error::Error;
};

// An iteration failed to reach its tolerance. Carries the last residual.
// CLI exit code 3.
struct ConvergenceError : Error {
    double residual;
    ConvergenceError(const std::string& what, double resid)
        : Error(what + " (residual " + std::to_string(resid) + ")"), residual(resid) {}
};

// A value left its physical domain (omega outside the reservoir band,
// non-positive occupation argument, singular frame, ...). CLI exit code 4.
struct DomainError : Error {
    using Error::Error;
};

// A caller violated a documented precondition (non-Hermitian input where a
// Hermitian matrix is required, etc.). Treated as a domain error by the CLI.
struct ContractError : Error {
    using Error::Error;
};

} // namespace tw

#endif
