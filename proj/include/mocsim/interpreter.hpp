#pragma once

#include "mocsim/engine.hpp"
#include "mocsim/mcscript.hpp"

namespace mocsim::mcscript {

struct RunOptions {
  /// Used by CreateDevice for omitted arguments, and as the implicit device
  /// when the program has no CreateDevice at all.
  engine::DeviceConfig device;
  engine::EngineOptions engine;
};

/// Executes the program statement by statement on a fresh engine. The first
/// failure stops execution; the result then carries its code and source
/// location, and the log recorded up to that point.
engine::RunResult run_program(const Program& program, const RunOptions& options);

}  // namespace mocsim::mcscript
