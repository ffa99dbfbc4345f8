#pragma once

#include <stdexcept>
#include <string>

namespace vexlap {

/// Base class of all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define VEXLAP_DEFINE_ERROR(Name)      \
  class Name : public Error {          \
   public:                             \
    using Error::Error;                \
  }

VEXLAP_DEFINE_ERROR(NonAdmissibleExponent);
VEXLAP_DEFINE_ERROR(IncompatibleSampling);
VEXLAP_DEFINE_ERROR(ResolutionMismatch);
VEXLAP_DEFINE_ERROR(ResolutionTooCoarse);
VEXLAP_DEFINE_ERROR(UnknownGenerator);
VEXLAP_DEFINE_ERROR(NoActiveDofs);
VEXLAP_DEFINE_ERROR(DegeneratePair);
VEXLAP_DEFINE_ERROR(EmptyConstraintSet);
VEXLAP_DEFINE_ERROR(PreconditionViolated);
VEXLAP_DEFINE_ERROR(ComponentBudgetExceeded);
VEXLAP_DEFINE_ERROR(ConditionCheckFailed);
VEXLAP_DEFINE_ERROR(ConfigError);
VEXLAP_DEFINE_ERROR(IoError);

#undef VEXLAP_DEFINE_ERROR

/// Raised when the nonlinear solve exhausts its continuation schedule.
/// Carries enough state to decide how to revise tolerance or schedule.
class NonConvergence : public Error {
 public:
  NonConvergence(int iterations, double best_residual)
      : Error("solver did not converge after " + std::to_string(iterations) +
              " iterations (best residual " + std::to_string(best_residual) + ")"),
        iterations(iterations),
        best_residual(best_residual) {}

  int iterations;
  double best_residual;
};

}  // namespace vexlap
