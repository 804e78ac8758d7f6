#pragma once

#include <stdexcept>
#include <string>

namespace sdg {

enum class Errc {
  InvalidArgument,
  NonFiniteCoefficient,
  DimensionMismatch,
  SignConditionViolated,
  AllocationTooLarge,
  GridMismatch,
  SpaceMismatch,
  NotAPartition,
  MissingNeutralizer,
  NoZeroFound,
  GrowthViolated,
  NonFiniteState,
  PreconditionViolated,
  DeltaOutOfRange,
  NonFiniteValue,
  GridTooCoarse,
  EmptyGrid,
  CflViolated,
  NonFiniteSolution,
  BoundaryPoint,
  ConfigInvalid,
  KindMismatch,
  UnknownKey,
  IoError,
};

const char* to_string(Errc code) noexcept;

/// Every failure raised by the library. `what()` carries the witness
/// (offending index, point, field path) when there is one.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message);

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace sdg
