#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace mocsim {

enum class ErrorCode {
  InvalidSpec,
  DegenerateGeometry,
  DimensionMismatch,
  InvalidConfig,
  AxisBusy,
  UnknownAxis,
  UnknownBit,
  UnknownEvent,
  UnknownCommand,
  WrongPhase,
  Timeout,
  AlreadyLogging,
  NotLogging,
  EmptyLog,
  EmptySeries,
  EmptyInput,
  EmptyIndex,
  BothEmpty,
  IoFailure,
  SchemaError,
  CanonicalCodeBroken,
  EmptyDataset,
  GeneratorUnavailable,
  RemoteError,
  InvalidArgument,
};

std::string_view to_string(ErrorCode code);

/// Every module reports failures through this one exception type so the
/// harness can classify them by code without knowing where they came from.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace mocsim
