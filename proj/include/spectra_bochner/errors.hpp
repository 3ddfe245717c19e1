#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace spectra_bochner {

enum class ErrorKind {
  NonPositiveMetric,
  DegeneratePlane,
  DegenerateImmersion,
  NotConvex,
  InsufficientSmoothness,
  NotPositiveDefinite,
  NonSymmetricCoefficient,
  DegenerateElement,
  MeshTopology,
  FactorizationFailure,
  NoConvergence,
  SchoutenUndefined,
  DenominatorNonpositive,
  DimensionTooSmall,
  InvalidArgument,
  ConfigParse,
  SuiteFailure,
  Io,
};

inline std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NonPositiveMetric: return "NonPositiveMetric";
    case ErrorKind::DegeneratePlane: return "DegeneratePlane";
    case ErrorKind::DegenerateImmersion: return "DegenerateImmersion";
    case ErrorKind::NotConvex: return "NotConvex";
    case ErrorKind::InsufficientSmoothness: return "InsufficientSmoothness";
    case ErrorKind::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorKind::NonSymmetricCoefficient: return "NonSymmetricCoefficient";
    case ErrorKind::DegenerateElement: return "DegenerateElement";
    case ErrorKind::MeshTopology: return "MeshTopology";
    case ErrorKind::FactorizationFailure: return "FactorizationFailure";
    case ErrorKind::NoConvergence: return "NoConvergence";
    case ErrorKind::SchoutenUndefined: return "SchoutenUndefined";
    case ErrorKind::DenominatorNonpositive: return "DenominatorNonpositive";
    case ErrorKind::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ConfigParse: return "ConfigParse";
    case ErrorKind::SuiteFailure: return "SuiteFailure";
    case ErrorKind::Io: return "Io";
  }
  return "Unknown";
}

/// Single exception type for the library; `kind()` identifies the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace spectra_bochner
