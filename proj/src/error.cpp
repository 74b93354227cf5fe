#include "advot/error.hpp"

namespace advot {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::DuplicateNode: return "DuplicateNode";
    case ErrorCode::DuplicateEdge: return "DuplicateEdge";
    case ErrorCode::DanglingEdge: return "DanglingEdge";
    case ErrorCode::NonpositiveCapacity: return "NonpositiveCapacity";
    case ErrorCode::IsolatedNode: return "IsolatedNode";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidBelief: return "InvalidBelief";
    case ErrorCode::InvalidBounds: return "InvalidBounds";
    case ErrorCode::InvalidParameter: return "InvalidParameter";
    case ErrorCode::PerturbationBelowFloor: return "PerturbationBelowFloor";
    case ErrorCode::ZeroLambda: return "ZeroLambda";
    case ErrorCode::NotConverged: return "NotConverged";
    case ErrorCode::StageNotConverged: return "StageNotConverged";
    case ErrorCode::DegenerateDenominator: return "DegenerateDenominator";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::CorruptLog: return "CorruptLog";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace advot
