#pragma once

#include <stdexcept>
#include <string>

namespace fdg {

/// Base class of every error raised by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InvalidDegree : Error { using Error::Error; };
struct InconsistentRule : Error { using Error::Error; };
struct DegenerateBasis : Error { using Error::Error; };
struct OperatorConstruction : Error { using Error::Error; };

/// Nonpositive density or pressure. Carries the offending values.
struct UnphysicalState : Error {
  UnphysicalState(const std::string& what, double rho, double p)
      : Error(what), density(rho), pressure(p) {}
  double density;
  double pressure;
};

struct EntropyInversion : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct DegenerateBarState : Error { using Error::Error; };
struct TelescopingClosure : Error { using Error::Error; };
struct MetricInconsistency : Error { using Error::Error; };
struct InvalidWarp : Error { using Error::Error; };
struct InvalidMesh : Error { using Error::Error; };
struct ContractViolation : Error { using Error::Error; };

/// A Runge-Kutta stage produced an inadmissible state.
struct StepFailure : Error {
  StepFailure(const std::string& what, int failed_stage)
      : Error(what), stage(failed_stage) {}
  int stage;
};

struct ConfigError : Error { using Error::Error; };

}  // namespace fdg
