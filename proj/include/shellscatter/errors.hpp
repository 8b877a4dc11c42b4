#pragma once

#include <stdexcept>
#include <string>

namespace shellscatter {

/// Base class of every error raised by the library. `kind()` is the stable
/// identifier written into machine-readable error reports.
class Error : public std::runtime_error {
  public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* kind() const noexcept { return "Error"; }
};

#define SHELLSCATTER_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                                \
      public:                                                                  \
        explicit Name(const std::string& what) : Error(what) {}                \
        const char* kind() const noexcept override { return #Name; }           \
    };

/// Energy too close to 0 or V0 for the closed forms (k or kappa in a denominator).
SHELLSCATTER_DEFINE_ERROR(DegenerateEnergy)
/// A resolvent quantity was requested at real energy.
SHELLSCATTER_DEFINE_ERROR(OnRealAxis)
SHELLSCATTER_DEFINE_ERROR(QuadratureFailure)
/// A test-function support touches 0, a, b or crosses a piece boundary.
SHELLSCATTER_DEFINE_ERROR(SupportViolation)
SHELLSCATTER_DEFINE_ERROR(OrderTooHigh)
SHELLSCATTER_DEFINE_ERROR(StepTooLarge)
SHELLSCATTER_DEFINE_ERROR(ConfigError)

#undef SHELLSCATTER_DEFINE_ERROR

} // namespace shellscatter
