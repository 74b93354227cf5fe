#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace advot {

enum class ErrorCode {
  // model-core
  EmptyInput,
  DuplicateNode,
  DuplicateEdge,
  DanglingEdge,
  NonpositiveCapacity,
  IsolatedNode,
  DimensionMismatch,
  InvalidBelief,
  InvalidBounds,
  InvalidParameter,
  PerturbationBelowFloor,
  // solvers
  ZeroLambda,
  NotConverged,
  StageNotConverged,
  DegenerateDenominator,
  // io
  ParseError,
  ValidationError,
  CorruptLog,
  IoError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace advot
