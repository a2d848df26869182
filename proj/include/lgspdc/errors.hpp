#pragma once

#include <sstream>
#include <stdexcept>
#include <string>

namespace lgspdc {

namespace detail {
inline std::string with_number(const std::string& what, const char* label, double x) {
    std::ostringstream os;
    os << what << " (" << label << " " << x << ")";
    return os.str();
}
}  // namespace detail

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument lies on (or within rounding of) a pole of Γ.
class PoleError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain an operation accepts.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Wavelength outside the validity window of an index model.
class RangeError : public Error {
public:
    using Error::Error;
};

/// A stated precondition on the physical configuration does not hold.
class PreconditionError : public Error {
public:
    using Error::Error;
};

/// Mode indices outside the configured truncation.
class TruncationError : public Error {
public:
    using Error::Error;
};

/// An iterative series did not reach its tolerance.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double attained)
        : Error(detail::with_number(what, "attained relative error", attained)),
          attained_error(attained) {}
    double attained_error;
};

/// A quadrature error estimate exceeds its budget.
class AccuracyError : public Error {
public:
    AccuracyError(const std::string& what, double estimate)
        : Error(detail::with_number(what, "error estimate", estimate)),
          error_estimate(estimate) {}
    double error_estimate;
};

/// The spectral grid does not cover the support of the state.
class GridError : public Error {
public:
    using Error::Error;
};

class DegenerateFilterError : public Error {
public:
    using Error::Error;
};

class EmptySubspaceError : public Error {
public:
    using Error::Error;
};

/// A target coincidence matrix cannot be realised with the allowed pump components.
class InfeasibleTargetError : public Error {
public:
    InfeasibleTargetError(const std::string& what, double residual)
        : Error(what), residual(residual) {}
    double residual;
};

}  // namespace lgspdc
