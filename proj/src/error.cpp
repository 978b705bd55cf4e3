#include "cpdgrid/error.hpp"

namespace cpdgrid {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::SelfLoop: return "SelfLoop";
    case ErrorCode::DuplicateBranch: return "DuplicateBranch";
    case ErrorCode::NonpositiveConductance: return "NonpositiveConductance";
    case ErrorCode::DisconnectedGraph: return "DisconnectedGraph";
    case ErrorCode::InteriorNodeHasInjection: return "InteriorNodeHasInjection";
    case ErrorCode::SingularInteriorBlock: return "SingularInteriorBlock";
    case ErrorCode::EigenSolverFailure: return "EigenSolverFailure";
    case ErrorCode::DisconnectedSpectrum: return "DisconnectedSpectrum";
    case ErrorCode::ZeroMeanVoltage: return "ZeroMeanVoltage";
    case ErrorCode::DeviationNotOrthogonal: return "DeviationNotOrthogonal";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::JacobianSingular: return "JacobianSingular";
    case ErrorCode::EqualPowers: return "EqualPowers";
    case ErrorCode::CertificateInapplicableAtBase: return "CertificateInapplicableAtBase";
    case ErrorCode::GenerationFailed: return "GenerationFailed";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::Internal: return "Internal";
  }
  return "Unknown";
}

}  // namespace cpdgrid
