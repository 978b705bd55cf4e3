#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace cpdgrid {

/// Error categories raised by the core library. The numeric values are part
/// of the C API (see cpdgrid.h) and must stay stable.
enum class ErrorCode : int {
  InvalidArgument = 1,
  ParseError = 2,
  UnknownNode = 3,
  SelfLoop = 4,
  DuplicateBranch = 5,
  NonpositiveConductance = 6,
  DisconnectedGraph = 7,
  InteriorNodeHasInjection = 8,
  SingularInteriorBlock = 9,
  EigenSolverFailure = 10,
  DisconnectedSpectrum = 11,
  ZeroMeanVoltage = 12,
  DeviationNotOrthogonal = 13,
  DimensionMismatch = 14,
  JacobianSingular = 15,
  EqualPowers = 16,
  CertificateInapplicableAtBase = 17,
  GenerationFailed = 18,
  IoError = 19,
  Internal = 99,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace cpdgrid
