#pragma once

#include <stdexcept>
#include <string>

namespace kescape {

enum class ErrorCode {
  domain,                 // argument outside the mathematical domain of an operation
  validity,               // instanton amplitude would be imaginary
  singularity,            // zero mode at the critical length
  convergence,            // lattice extrapolation disagreement
  numerical_overflow,     // non-finite values while integrating
  instability,            // explicit time stepping blew up
  insufficient_sampling,  // too many censored first-passage runs
};

const char* to_string(ErrorCode code) noexcept;

/// Base of every error raised by the library. Carries a machine-readable code
/// that the C API maps onto its status values.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define KESCAPE_DEFINE_ERROR(Name, Code) \
  class Name : public Error {            \
   public:                               \
    explicit Name(const std::string& what) : Error(ErrorCode::Code, what) {} \
  }

KESCAPE_DEFINE_ERROR(DomainError, domain);
KESCAPE_DEFINE_ERROR(ValidityError, validity);
KESCAPE_DEFINE_ERROR(SingularityError, singularity);
KESCAPE_DEFINE_ERROR(ConvergenceError, convergence);
KESCAPE_DEFINE_ERROR(NumericalOverflowError, numerical_overflow);
KESCAPE_DEFINE_ERROR(InstabilityError, instability);
KESCAPE_DEFINE_ERROR(InsufficientSamplingError, insufficient_sampling);

#undef KESCAPE_DEFINE_ERROR

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::domain: return "domain error";
    case ErrorCode::validity: return "validity error";
    case ErrorCode::singularity: return "singularity error";
    case ErrorCode::convergence: return "convergence error";
    case ErrorCode::numerical_overflow: return "numerical overflow";
    case ErrorCode::instability: return "instability error";
    case ErrorCode::insufficient_sampling: return "insufficient sampling";
  }
  return "unknown error";
}

}  // namespace kescape
