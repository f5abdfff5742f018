#include "mocsim/interpreter.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "build.hpp"
#include "mocsim/error.hpp"

namespace mocsim::mcscript {
namespace {

using namespace detail;

std::vector<int> iota(int n) {
  std::vector<int> out;
  for (int i = 0; i < n; ++i) out.push_back(i);
  return out;
}

void reject_duplicates(const std::vector<int>& ids, const char* what) {
  std::set<int> seen;
  for (int id : ids)
    if (!seen.insert(id).second)
      throw Error(ErrorCode::InvalidArgument, std::string(what) + " " + std::to_string(id) + " listed twice");
}

class Interpreter {
 public:
  explicit Interpreter(const RunOptions& options) : options_(options) {}

  engine::RunResult run(const Program& program) {
    const Statement* current = nullptr;
    engine::RunResult result;
    try {
      const bool has_create = std::any_of(program.statements.begin(), program.statements.end(),
                                          [](const Statement& s) { return s.command == "CreateDevice"; });
      if (!has_create) {
        engine_.emplace(options_.device, options_.engine);
        engine_->start_communication();
      }
      for (const auto& st : program.statements) {
        current = &st;
        execute(st);
      }
      current = nullptr;
    } catch (const Error& e) {
      result.error = engine::RunError{e.code(), e.what(), 0, 0};
    } catch (const std::exception& e) {
      result.error = engine::RunError{ErrorCode::InvalidArgument, e.what(), 0, 0};
    }
    if (result.error && current) {
      result.error->line = current->location.line;
      result.error->column = current->location.column;
    }
    if (engine_) {
      auto closed = engine_->close_device();
      result.warnings = std::move(closed.warnings);
      result.log = std::move(closed.log);
      result.final_state = std::move(closed.final_state);
    }
    return result;
  }

 private:
  engine::Engine& device(const Statement& st) {
    if (!engine_) throw Error(ErrorCode::WrongPhase, st.command + " before CreateDevice");
    return *engine_;
  }

  // Every command except the lifecycle ones needs a communicating device.
  engine::Engine& communicating(const Statement& st) {
    auto& e = device(st);
    if (e.phase() != engine::DevicePhase::Communicating)
      throw Error(ErrorCode::WrongPhase, st.command + " requires the device to be Communicating");
    return e;
  }

  engine::EventId event(int id) const {
    auto it = events_.find(id);
    if (it == events_.end()) throw Error(ErrorCode::UnknownEvent, "unknown event " + std::to_string(id));
    return it->second;
  }

  engine::EventAction action_from(const Statement& st, const std::string& command) {
    if (command == "SetOut") return engine::SetOutputAction{int_arg(st, "bit"), int_arg(st, "level")};
    if (command == "StartPos")
      return engine::StartPosAction{channel_from(st), int_arg(st, "axis"), number_arg(st, "target"), spec_from(st)};
    return engine::StartPathAction{channel_from(st), path_from(st, command)};
  }

  void execute(const Statement& st) {
    const std::string& c = st.command;
    if (c == "CreateDevice") {
      if (engine_) throw Error(ErrorCode::WrongPhase, "device already created");
      engine::DeviceConfig cfg = options_.device;
      if (auto axes = optional_int_list(st, "axes")) cfg.axes = *axes;
      cfg.input_bits = optional_int(st, "inputs").value_or(options_.device.input_bits);
      cfg.output_bits = optional_int(st, "outputs").value_or(options_.device.output_bits);
      engine_.emplace(cfg, options_.engine);
    } else if (c == "StartCommunication") {
      device(st).start_communication();
    } else if (c == "CloseDevice") {
      device(st).close_device();
    } else if (c == "StartLog") {
      auto& e = communicating(st);
      const auto axes = optional_int_list(st, "axes").value_or(e.config().axes);
      const auto in = optional_int_list(st, "inputs").value_or(iota(e.config().input_bits));
      const auto out = optional_int_list(st, "outputs").value_or(iota(e.config().output_bits));
      reject_duplicates(axes, "axis");
      reject_duplicates(in, "input bit");
      reject_duplicates(out, "output bit");
      e.start_log(axes, in, out);
    } else if (c == "StopLog") {
      communicating(st).stop_log();
    } else if (c == "StartPos") {
      communicating(st).start_pos(channel_from(st), int_arg(st, "axis"), number_arg(st, "target"), spec_from(st));
    } else if (c == "StartLinear" || c == "StartCircular" || c == "StartHelical" || c == "StartSpline") {
      auto& e = communicating(st);
      e.start_path(channel_from(st), path_from(st, c));
    } else if (c == "StartLookahead") {
      auto& e = communicating(st);
      const auto args = lookahead_from(st);
      e.start_lookahead(channel_from(st), args.segments, args.limits, args.tolerance);
    } else if (c == "SetEvent") {
      auto& e = communicating(st);
      const int id = int_arg(st, "id");
      if (events_.count(id)) throw Error(ErrorCode::InvalidArgument, "event " + std::to_string(id) + " already defined");
      static constexpr std::string_view kinds[] = {"DistanceToTarget", "InputEdge", "PositionReached"};
      const std::string type = enum_arg(st, "type", "EventType", kinds);
      engine::EventBinding binding;
      if (type == "InputEdge") {
        binding.condition = engine::EventCondition::input_edge(int_arg(st, "bit"), optional_int(st, "level").value_or(1));
      } else if (type == "DistanceToTarget") {
        binding.condition = engine::EventCondition::distance_to_target(int_arg(st, "axis"), number_arg(st, "value"));
      } else {
        binding.condition = engine::EventCondition::position_reached(int_arg(st, "axis"), number_arg(st, "value"));
      }
      events_[id] = e.set_event_input(binding);
    } else if (c == "OnEvent") {
      auto& e = communicating(st);
      static constexpr std::string_view actions[] = {"SetOut",      "StartCircular", "StartHelical",
                                                     "StartLinear", "StartPos",      "StartSpline"};
      const std::string command = enum_arg(st, "action", "EventAction", actions);
      const auto id = event(int_arg(st, "id"));
      e.set_event_action(id, action_from(st, command));
    } else if (c == "WaitEvent") {
      auto& e = communicating(st);
      e.wait_event(event(int_arg(st, "id")));
    } else if (c == "Wait") {
      auto& e = communicating(st);
      if (st.find("axis") && st.find("axes"))
        throw Error(ErrorCode::InvalidArgument, "Wait needs exactly one of 'axis' or 'axes'");
      if (st.find("axis")) {
        e.wait(int_arg(st, "axis"));
      } else {
        for (int a : int_list_arg(st, "axes")) e.wait(a);
      }
    } else if (c == "Sleep") {
      const int ms = int_arg(st, "ms");
      if (ms < 0) throw Error(ErrorCode::InvalidArgument, "'ms' must be >= 0");
      communicating(st).sleep(ms);
    } else if (c == "SetOut") {
      communicating(st).set_output_bit(int_arg(st, "bit"), int_arg(st, "level"));
    } else if (c == "SetIn") {
      communicating(st).set_input_bit(int_arg(st, "bit"), int_arg(st, "level"));
    } else {
      std::string message = "Unknown command " + c + ".";
      if (auto s = suggest(c, command_vocabulary())) message += " Did you mean: " + *s + "?";
      throw Error(ErrorCode::UnknownCommand, message);
    }
  }

  RunOptions options_;
  std::optional<engine::Engine> engine_;
  std::map<int, engine::EventId> events_;
};

}  // namespace

engine::RunResult run_program(const Program& program, const RunOptions& options) {
  return Interpreter(options).run(program);
}

}  // namespace mocsim::mcscript
