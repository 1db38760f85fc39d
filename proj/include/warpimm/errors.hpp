#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace warpimm {

enum class ErrorKind {
  DimensionMismatch,
  AsymmetryExceedsTol,
  FrameNotOrthonormal,
  BudgetZero,
  SOutOfRange,
  DegenerateForm,
  WrongBlockCount,
  TrialsZero,
  HypothesisFailed,
  UmbilicalConstraintViolated,
  BasePointOffQuadric,
  NonpositiveWarping,
  ResultOffQuadric,
  StepTooLargeForDomain,
  RequiresCurvedAmbient,
  OutOfDomain,
  DegenerateGrid,
  RankDeficientJacobian,
  FactorTargetMismatch,
  DomainMismatch,
  HypothesisViolated,
  NotAdapted,
  InconsistentWarpedStructure,
  PTooLarge,
  ParseError,
  InvalidArgument,
};

std::string_view errorKindName(ErrorKind kind);

// Every failure in the library is reported through this type. `details`
// carries the structured payload the CLI echoes back (offending indices,
// witnessing s, parse position, ...).
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message,
        nlohmann::json details = nlohmann::json::object())
      : std::runtime_error(message), kind_(kind), details_(std::move(details)) {}

  ErrorKind kind() const noexcept { return kind_; }
  const nlohmann::json& details() const noexcept { return details_; }

  nlohmann::json toJson() const;

 private:
  ErrorKind kind_;
  nlohmann::json details_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message,
                              nlohmann::json details = nlohmann::json::object()) {
  throw Error(kind, message, std::move(details));
}

}  // namespace warpimm
