#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace twinseg {

enum class ErrorCode {
  EmptyIndex,
  InvalidRadius,
  ParseError,
  InvalidCoordinate,
  UnsupportedEncoding,
  IoError,
  ReservedId,
  InvalidPartition,
  InvalidNoiseSpec,
  DegenerateNeighborhood,
  NoTrainingData,
  MissingLabels,
  LabelConflict,
  InvalidSweep,
  UndefinedIoU,
  EmptyFacility,
  MissingRate,
  InvalidCounts,
  InvalidCurve,
  InvalidPrimitive,
  InvalidConfig,
  InvalidParams,
};

std::string_view to_string(ErrorCode code) noexcept;

/// Library failure; what() reads "Code: message".
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        message_(message) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }
  /// Message without the code prefix.
  [[nodiscard]] const std::string& message() const noexcept { return message_; }

 private:
  ErrorCode code_;
  std::string message_;
};

}  // namespace twinseg
