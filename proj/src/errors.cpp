#include "warpimm/errors.hpp"

namespace warpimm {

std::string_view errorKindName(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::AsymmetryExceedsTol: return "AsymmetryExceedsTol";
    case ErrorKind::FrameNotOrthonormal: return "FrameNotOrthonormal";
    case ErrorKind::BudgetZero: return "BudgetZero";
    case ErrorKind::SOutOfRange: return "SOutOfRange";
    case ErrorKind::DegenerateForm: return "DegenerateForm";
    case ErrorKind::WrongBlockCount: return "WrongBlockCount";
    case ErrorKind::TrialsZero: return "TrialsZero";
    case ErrorKind::HypothesisFailed: return "HypothesisFailed";
    case ErrorKind::UmbilicalConstraintViolated: return "UmbilicalConstraintViolated";
    case ErrorKind::BasePointOffQuadric: return "BasePointOffQuadric";
    case ErrorKind::NonpositiveWarping: return "NonpositiveWarping";
    case ErrorKind::ResultOffQuadric: return "ResultOffQuadric";
    case ErrorKind::StepTooLargeForDomain: return "StepTooLargeForDomain";
    case ErrorKind::RequiresCurvedAmbient: return "RequiresCurvedAmbient";
    case ErrorKind::OutOfDomain: return "OutOfDomain";
    case ErrorKind::DegenerateGrid: return "DegenerateGrid";
    case ErrorKind::RankDeficientJacobian: return "RankDeficientJacobian";
    case ErrorKind::FactorTargetMismatch: return "FactorTargetMismatch";
    case ErrorKind::DomainMismatch: return "DomainMismatch";
    case ErrorKind::HypothesisViolated: return "HypothesisViolated";
    case ErrorKind::NotAdapted: return "NotAdapted";
    case ErrorKind::InconsistentWarpedStructure: return "InconsistentWarpedStructure";
    case ErrorKind::PTooLarge: return "PTooLarge";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

nlohmann::json Error::toJson() const {
  return {{"kind", std::string(errorKindName(kind_))},
          {"message", what()},
          {"details", details_}};
}

}  // namespace warpimm
