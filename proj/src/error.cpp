#include "mocsim/error.hpp"

namespace mocsim {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidSpec: return "InvalidSpec";
    case ErrorCode::DegenerateGeometry: return "DegenerateGeometry";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::InvalidConfig: return "InvalidConfig";
    case ErrorCode::AxisBusy: return "AxisBusy";
    case ErrorCode::UnknownAxis: return "UnknownAxis";
    case ErrorCode::UnknownBit: return "UnknownBit";
    case ErrorCode::UnknownEvent: return "UnknownEvent";
    case ErrorCode::UnknownCommand: return "UnknownCommand";
    case ErrorCode::WrongPhase: return "WrongPhase";
    case ErrorCode::Timeout: return "Timeout";
    case ErrorCode::AlreadyLogging: return "AlreadyLogging";
    case ErrorCode::NotLogging: return "NotLogging";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::EmptyInput: return "EmptyInput";
    case ErrorCode::EmptyIndex: return "EmptyIndex";
    case ErrorCode::BothEmpty: return "BothEmpty";
    case ErrorCode::IoFailure: return "IoFailure";
    case ErrorCode::SchemaError: return "SchemaError";
    case ErrorCode::CanonicalCodeBroken: return "CanonicalCodeBroken";
    case ErrorCode::EmptyDataset: return "EmptyDataset";
    case ErrorCode::GeneratorUnavailable: return "GeneratorUnavailable";
    case ErrorCode::RemoteError: return "RemoteError";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

}  // namespace mocsim
