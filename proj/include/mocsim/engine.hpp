#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <variant>
#include <vector>

#include "mocsim/error.hpp"
#include "mocsim/interp.hpp"
#include "mocsim/profiles.hpp"
#include "mocsim/trajectory_log.hpp"

namespace mocsim::engine {

inline constexpr int kMaxAxes = 128;
inline constexpr int kMaxChannels = 256;
inline constexpr int kMaxBits = 256;
inline constexpr std::int64_t kDefaultMaxWaitTicks = 10'000'000;

struct DeviceConfig {
  std::vector<int> axes;
  int input_bits = 16;
  int output_bits = 16;
};

/// Throws Error(InvalidConfig).
void validate(const DeviceConfig& config);

struct EngineOptions {
  std::int64_t max_wait_ticks = kDefaultMaxWaitTicks;
};

enum class DevicePhase { Created, Communicating, Closed };

struct CommandHandle {
  std::uint64_t id = 0;
  int channel = 0;
  std::vector<int> axes;
};

enum class EventKind { DistanceToTarget, PositionReached, InputEdge };

struct EventCondition {
  EventKind kind = EventKind::DistanceToTarget;
  int axis = -1;
  double value = 0.0;
  int bit = -1;
  int level = 1;

  static EventCondition distance_to_target(int axis, double value) {
    return {EventKind::DistanceToTarget, axis, value, -1, 1};
  }
  static EventCondition position_reached(int axis, double value) {
    return {EventKind::PositionReached, axis, value, -1, 1};
  }
  static EventCondition input_edge(int bit, int level) {
    return {EventKind::InputEdge, -1, 0.0, bit, level};
  }
};

struct StartPosAction {
  int channel = 0;
  int axis = 0;
  double target = 0.0;
  profiles::ProfileSpec spec;
};

struct StartPathAction {
  int channel = 0;
  interp::PathSegment segment;
};

struct SetOutputAction {
  int bit = 0;
  int level = 0;
};

using EventAction = std::variant<StartPosAction, StartPathAction, SetOutputAction>;

struct EventBinding {
  EventCondition condition;
  std::optional<EventAction> action;
};

using EventId = int;

struct AxisSnapshot {
  int id = 0;
  double position = 0.0;
  double velocity = 0.0;
  bool busy = false;
};

struct EngineSnapshot {
  std::int64_t time_ms = 0;
  DevicePhase phase = DevicePhase::Created;
  std::vector<AxisSnapshot> axes;
  std::vector<std::uint8_t> inputs;
  std::vector<std::uint8_t> outputs;
  std::vector<int> busy_channels;
};

struct RunError {
  ErrorCode code = ErrorCode::InvalidArgument;
  std::string message;
  int line = 0;
  int column = 0;
};

struct RunResult {
  std::optional<RunError> error;  // empty on success
  std::vector<std::string> warnings;
  TrajectoryLog log;
  EngineSnapshot final_state;

  bool success() const { return !error.has_value(); }
};

/// Deterministic 1 ms soft-motion simulator. Commanded positions only: axes
/// follow their plans exactly. Not thread-safe; use one instance per run.
///
/// Within a tick the order is: pending event actions, motion update, event
/// monitor evaluation, log append.
class Engine {
 public:
  /// create_device. Throws Error(InvalidConfig).
  explicit Engine(DeviceConfig config, EngineOptions options = {});

  void start_communication();

  CommandHandle start_pos(int channel, int axis, double target, const profiles::ProfileSpec& spec);
  CommandHandle start_path(int channel, const interp::PathSegment& segment);
  CommandHandle start_lookahead(int channel, const std::vector<interp::PathSegment>& segments,
                                const profiles::ProfileSpec& limits,
                                double corner_tolerance = interp::kDefaultCornerTolerance);

  /// Both return the number of ticks consumed.
  std::int64_t wait(int axis);
  std::int64_t wait_event(EventId id);
  std::int64_t sleep(std::int64_t ms);

  EventId set_event_input(const EventBinding& binding);
  /// Replaces the one-shot action of an armed, not yet fired event.
  void set_event_action(EventId id, const EventAction& action);
  bool event_fired(EventId id) const;
  int event_action_count(EventId id) const;

  void set_output_bit(int bit, int level);
  int read_output(int bit) const;
  /// Test/harness hook standing in for field inputs.
  void set_input_bit(int bit, int level);
  int read_input(int bit) const;

  void start_log(const std::vector<int>& axes, const std::vector<int>& inputs,
                 const std::vector<int>& outputs);
  TrajectoryLog stop_log();
  bool logging() const { return logging_; }

  void tick();

  /// Idempotent. In-flight motion is reported as a warning.
  RunResult close_device();

  DevicePhase phase() const { return phase_; }
  std::int64_t time_ms() const { return time_ms_; }
  const DeviceConfig& config() const { return config_; }
  double position(int axis) const;
  double velocity(int axis) const;
  bool axis_busy(int axis) const;
  EngineSnapshot snapshot() const;

 private:
  using Plan = std::variant<profiles::ProfilePlan, interp::PathPlan, interp::LookaheadPlan>;

  struct Motion {
    std::uint64_t id = 0;
    int channel = 0;
    std::vector<std::size_t> axis_slots;
    std::int64_t start_ms = 0;
    double duration = 0.0;
    Plan plan;
  };

  struct AxisState {
    int id = 0;
    double position = 0.0;
    double velocity = 0.0;
    bool busy = false;
    std::optional<double> last_target;
  };

  struct Monitor {
    EventBinding binding;
    bool latched = false;
    bool fired = false;  // latched and action (if any) dispatched
    int action_count = 0;
    double previous = 0.0;
  };

  void require_phase(DevicePhase phase, const char* operation) const;
  std::size_t slot(int axis) const;
  void check_bit(int bit, int count, const char* kind) const;
  void check_channel(int channel) const;
  CommandHandle install(int channel, std::vector<std::size_t> slots, Plan plan, double duration,
                        const std::vector<double>& targets);
  void run_action(const EventAction& action);
  bool evaluate(Monitor& monitor);
  void append_log_row();
  Monitor& monitor(EventId id);
  const Monitor& monitor(EventId id) const;

  DeviceConfig config_;
  EngineOptions options_;
  DevicePhase phase_ = DevicePhase::Created;
  std::int64_t time_ms_ = 0;
  std::uint64_t next_command_id_ = 1;

  std::vector<AxisState> axes_;
  std::unordered_map<int, std::size_t> axis_slot_;
  std::vector<std::uint8_t> inputs_;
  std::vector<std::uint8_t> outputs_;
  std::vector<Motion> motions_;
  std::vector<Monitor> monitors_;

  bool logging_ = false;
  TrajectoryLog log_;
  std::vector<std::size_t> log_axis_slots_;
  TrajectoryLog last_log_;
  std::optional<RunResult> closed_result_;
};

}  // namespace mocsim::engine
