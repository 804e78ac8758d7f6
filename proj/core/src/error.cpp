#include "sdg/error.hpp"

namespace sdg {

const char* to_string(Errc code) noexcept {
  switch (code) {
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::NonFiniteCoefficient: return "NonFiniteCoefficient";
    case Errc::DimensionMismatch: return "DimensionMismatch";
    case Errc::SignConditionViolated: return "SignConditionViolated";
    case Errc::AllocationTooLarge: return "AllocationTooLarge";
    case Errc::GridMismatch: return "GridMismatch";
    case Errc::SpaceMismatch: return "SpaceMismatch";
    case Errc::NotAPartition: return "NotAPartition";
    case Errc::MissingNeutralizer: return "MissingNeutralizer";
    case Errc::NoZeroFound: return "NoZeroFound";
    case Errc::GrowthViolated: return "GrowthViolated";
    case Errc::NonFiniteState: return "NonFiniteState";
    case Errc::PreconditionViolated: return "PreconditionViolated";
    case Errc::DeltaOutOfRange: return "DeltaOutOfRange";
    case Errc::NonFiniteValue: return "NonFiniteValue";
    case Errc::GridTooCoarse: return "GridTooCoarse";
    case Errc::EmptyGrid: return "EmptyGrid";
    case Errc::CflViolated: return "CflViolated";
    case Errc::NonFiniteSolution: return "NonFiniteSolution";
    case Errc::BoundaryPoint: return "BoundaryPoint";
    case Errc::ConfigInvalid: return "ConfigInvalid";
    case Errc::KindMismatch: return "KindMismatch";
    case Errc::UnknownKey: return "UnknownKey";
    case Errc::IoError: return "IoError";
  }
  return "Unknown";
}

Error::Error(Errc code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

}  // namespace sdg
