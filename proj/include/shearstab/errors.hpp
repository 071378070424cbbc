#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace shearstab {

// Every failure the library reports derives from Error, so callers that do
// not care about the kind can catch one type.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : Error { using Error::Error; };
struct UnsupportedEvaluation : Error { using Error::Error; };
struct RootNotFound : Error {
  RootNotFound(const std::string& what, std::complex<double> last)
      : Error(what), last_iterate(last) {}
  std::complex<double> last_iterate;
};
struct SingularIntegration : Error { using Error::Error; };
struct StepUnderflow : Error { using Error::Error; };
struct IntegrationFailure : Error { using Error::Error; };
struct ScaledRepresentation : Error { using Error::Error; };
struct TurningPointOnPath : Error { using Error::Error; };
struct NormalizationFailure : Error { using Error::Error; };
struct ContinuationFailure : Error { using Error::Error; };
struct DegenerateEigenvalue : Error { using Error::Error; };
struct NearSingularSolve : Error { using Error::Error; };
struct DegeneratePairing : Error { using Error::Error; };
struct InvalidCarrier : Error { using Error::Error; };
struct Infeasible : Error { using Error::Error; };
struct SuperViscous : Error { using Error::Error; };
struct InconsistentScenario : Error { using Error::Error; };
struct ExpansionTruncation : Error { using Error::Error; };
struct UsageError : Error { using Error::Error; };
struct IoError : Error { using Error::Error; };

}  // namespace shearstab
