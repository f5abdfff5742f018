#include "mocsim/engine.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

namespace mocsim::engine {
namespace {

constexpr double kTickSeconds = 1e-3;
// A plan whose duration is within this of the elapsed time counts as done, so
// an 11.0 s plan completes on tick 11000 despite rounding in its duration.
constexpr double kCompletionSlack = 1e-9;

std::string join_ids(const std::vector<int>& ids) {
  std::ostringstream out;
  for (std::size_t i = 0; i < ids.size(); ++i) out << (i ? ", " : "") << ids[i];
  return out.str();
}

}  // namespace

void validate(const DeviceConfig& config) {
  if (config.axes.size() > static_cast<std::size_t>(kMaxAxes))
    throw Error(ErrorCode::InvalidConfig, "at most " + std::to_string(kMaxAxes) + " axes are supported, got " +
                                              std::to_string(config.axes.size()));
  std::set<int> seen;
  for (int id : config.axes) {
    if (id < 0) throw Error(ErrorCode::InvalidConfig, "axis ids must be non-negative, got " + std::to_string(id));
    if (!seen.insert(id).second) throw Error(ErrorCode::InvalidConfig, "duplicate axis id " + std::to_string(id));
  }
  if (config.input_bits < 0 || config.input_bits > kMaxBits)
    throw Error(ErrorCode::InvalidConfig, "input bit count must lie in [0, 256]");
  if (config.output_bits < 0 || config.output_bits > kMaxBits)
    throw Error(ErrorCode::InvalidConfig, "output bit count must lie in [0, 256]");
}

Engine::Engine(DeviceConfig config, EngineOptions options)
    : config_(std::move(config)), options_(options) {
  validate(config_);
  axes_.reserve(config_.axes.size());
  for (int id : config_.axes) {
    axis_slot_.emplace(id, axes_.size());
    AxisState axis;
    axis.id = id;
    axes_.push_back(axis);
  }
  inputs_.assign(static_cast<std::size_t>(config_.input_bits), 0);
  outputs_.assign(static_cast<std::size_t>(config_.output_bits), 0);
}

void Engine::start_communication() {
  require_phase(DevicePhase::Created, "StartCommunication");
  phase_ = DevicePhase::Communicating;
}

void Engine::require_phase(DevicePhase phase, const char* operation) const {
  if (phase_ == phase) return;
  static constexpr const char* names[] = {"Created", "Communicating", "Closed"};
  throw Error(ErrorCode::WrongPhase, std::string(operation) + " requires the device to be " +
                                         names[static_cast<int>(phase)] + " but it is " +
                                         names[static_cast<int>(phase_)]);
}

std::size_t Engine::slot(int axis) const {
  auto it = axis_slot_.find(axis);
  if (it == axis_slot_.end())
    throw Error(ErrorCode::UnknownAxis,
                "unknown axis " + std::to_string(axis) + "; valid axes are [" + join_ids(config_.axes) + "]");
  return it->second;
}

void Engine::check_bit(int bit, int count, const char* kind) const {
  if (bit < 0 || bit >= count)
    throw Error(ErrorCode::UnknownBit, std::string("unknown ") + kind + " bit " + std::to_string(bit) +
                                           "; valid range is 0.." + std::to_string(count - 1));
}

void Engine::check_channel(int channel) const {
  if (channel < 0 || channel >= kMaxChannels)
    throw Error(ErrorCode::InvalidArgument, "channel " + std::to_string(channel) + " outside 0..255");
}

CommandHandle Engine::install(int channel, std::vector<std::size_t> slots, Plan plan, double duration,
                              const std::vector<double>& targets) {
  Motion motion;
  motion.id = next_command_id_++;
  motion.channel = channel;
  motion.start_ms = time_ms_;
  motion.duration = duration;
  motion.plan = std::move(plan);
  CommandHandle handle{motion.id, channel, {}};
  for (std::size_t i = 0; i < slots.size(); ++i) {
    axes_[slots[i]].busy = true;
    axes_[slots[i]].last_target = targets[i];
    handle.axes.push_back(axes_[slots[i]].id);
  }
  motion.axis_slots = std::move(slots);
  motions_.push_back(std::move(motion));
  return handle;
}

CommandHandle Engine::start_pos(int channel, int axis, double target, const profiles::ProfileSpec& spec) {
  require_phase(DevicePhase::Communicating, "StartPos");
  check_channel(channel);
  const std::size_t s = slot(axis);
  if (axes_[s].busy) throw Error(ErrorCode::AxisBusy, "axis " + std::to_string(axis) + " is busy");
  auto plan = profiles::plan_profile(axes_[s].position, target, spec);
  const double duration = plan.total_duration;
  return install(channel, {s}, std::move(plan), duration, {target});
}

CommandHandle Engine::start_path(int channel, const interp::PathSegment& segment) {
  require_phase(DevicePhase::Communicating, "StartPath");
  check_channel(channel);
  std::vector<std::size_t> slots;
  interp::Point start;
  for (int axis : segment.axes) {
    const std::size_t s = slot(axis);
    if (std::find(slots.begin(), slots.end(), s) != slots.end())
      throw Error(ErrorCode::DimensionMismatch, "axis " + std::to_string(axis) + " listed twice");
    if (axes_[s].busy) throw Error(ErrorCode::AxisBusy, "axis " + std::to_string(axis) + " is busy");
    slots.push_back(s);
    start.push_back(axes_[s].position);
  }
  auto plan = interp::plan_path(start, segment);
  const double duration = plan.duration();
  const interp::Point end = plan.terminal_point();
  return install(channel, std::move(slots), std::move(plan), duration, end);
}

CommandHandle Engine::start_lookahead(int channel, const std::vector<interp::PathSegment>& segments,
                                      const profiles::ProfileSpec& limits, double corner_tolerance) {
  require_phase(DevicePhase::Communicating, "StartLookahead");
  check_channel(channel);
  if (segments.empty()) throw Error(ErrorCode::InvalidArgument, "look-ahead needs at least one segment");
  std::vector<std::size_t> slots;
  interp::Point start;
  for (int axis : segments.front().axes) {
    const std::size_t s = slot(axis);
    if (std::find(slots.begin(), slots.end(), s) != slots.end())
      throw Error(ErrorCode::DimensionMismatch, "axis " + std::to_string(axis) + " listed twice");
    if (axes_[s].busy) throw Error(ErrorCode::AxisBusy, "axis " + std::to_string(axis) + " is busy");
    slots.push_back(s);
    start.push_back(axes_[s].position);
  }
  auto plan = interp::plan_lookahead(start, segments, limits, corner_tolerance);
  const double duration = plan.total_duration;
  const interp::Point end = plan.plans.back().terminal_point();
  return install(channel, std::move(slots), std::move(plan), duration, end);
}

std::int64_t Engine::wait(int axis) {
  const std::size_t s = slot(axis);
  std::int64_t ticks = 0;
  while (axes_[s].busy) {
    if (ticks >= options_.max_wait_ticks)
      throw Error(ErrorCode::Timeout, "timed out waiting for axis " + std::to_string(axis) + " after " +
                                          std::to_string(ticks) + " ticks");
    tick();
    ++ticks;
  }
  return ticks;
}

std::int64_t Engine::wait_event(EventId id) {
  const Monitor& m = monitor(id);
  std::int64_t ticks = 0;
  while (!m.fired) {
    if (ticks >= options_.max_wait_ticks)
      throw Error(ErrorCode::Timeout, "timed out waiting for event " + std::to_string(id) + " after " +
                                          std::to_string(ticks) + " ticks");
    tick();
    ++ticks;
  }
  return ticks;
}

std::int64_t Engine::sleep(std::int64_t ms) {
  for (std::int64_t i = 0; i < ms; ++i) tick();
  return ms;
}

Engine::Monitor& Engine::monitor(EventId id) {
  if (id < 0 || static_cast<std::size_t>(id) >= monitors_.size())
    throw Error(ErrorCode::UnknownEvent, "unknown event " + std::to_string(id));
  return monitors_[static_cast<std::size_t>(id)];
}

const Engine::Monitor& Engine::monitor(EventId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= monitors_.size())
    throw Error(ErrorCode::UnknownEvent, "unknown event " + std::to_string(id));
  return monitors_[static_cast<std::size_t>(id)];
}

EventId Engine::set_event_input(const EventBinding& binding) {
  require_phase(DevicePhase::Communicating, "SetEvent");
  Monitor m;
  m.binding = binding;
  const auto& c = binding.condition;
  switch (c.kind) {
    case EventKind::DistanceToTarget:
      slot(c.axis);
      break;
    case EventKind::PositionReached:
      m.previous = axes_[slot(c.axis)].position;
      break;
    case EventKind::InputEdge:
      check_bit(c.bit, config_.input_bits, "input");
      m.previous = inputs_[static_cast<std::size_t>(c.bit)];
      break;
  }
  if (binding.action) {
    if (const auto* out = std::get_if<SetOutputAction>(&*binding.action))
      check_bit(out->bit, config_.output_bits, "output");
  }
  monitors_.push_back(std::move(m));
  return static_cast<EventId>(monitors_.size() - 1);
}

void Engine::set_event_action(EventId id, const EventAction& action) {
  Monitor& m = monitor(id);
  if (const auto* out = std::get_if<SetOutputAction>(&action)) check_bit(out->bit, config_.output_bits, "output");
  if (m.latched) throw Error(ErrorCode::InvalidArgument, "event " + std::to_string(id) + " already fired");
  m.binding.action = action;
}

bool Engine::event_fired(EventId id) const { return monitor(id).fired; }
int Engine::event_action_count(EventId id) const { return monitor(id).action_count; }

void Engine::set_output_bit(int bit, int level) {
  require_phase(DevicePhase::Communicating, "SetOut");
  check_bit(bit, config_.output_bits, "output");
  outputs_[static_cast<std::size_t>(bit)] = level ? 1 : 0;
}

int Engine::read_output(int bit) const {
  check_bit(bit, config_.output_bits, "output");
  return outputs_[static_cast<std::size_t>(bit)];
}

void Engine::set_input_bit(int bit, int level) {
  check_bit(bit, config_.input_bits, "input");
  inputs_[static_cast<std::size_t>(bit)] = level ? 1 : 0;
}

int Engine::read_input(int bit) const {
  check_bit(bit, config_.input_bits, "input");
  return inputs_[static_cast<std::size_t>(bit)];
}

void Engine::start_log(const std::vector<int>& axes, const std::vector<int>& inputs,
                       const std::vector<int>& outputs) {
  require_phase(DevicePhase::Communicating, "StartLog");
  if (logging_) throw Error(ErrorCode::AlreadyLogging, "logging already started");
  std::vector<std::size_t> slots;
  for (int a : axes) slots.push_back(slot(a));
  for (int b : inputs) check_bit(b, config_.input_bits, "input");
  for (int b : outputs) check_bit(b, config_.output_bits, "output");
  log_ = TrajectoryLog{};
  log_.axes = axes;
  log_.inputs = inputs;
  log_.outputs = outputs;
  log_.positions.resize(axes.size());
  log_.velocities.resize(axes.size());
  log_.input_bits.resize(inputs.size());
  log_.output_bits.resize(outputs.size());
  log_axis_slots_ = std::move(slots);
  logging_ = true;
}

TrajectoryLog Engine::stop_log() {
  if (!logging_) throw Error(ErrorCode::NotLogging, "logging was not started");
  logging_ = false;
  last_log_ = std::move(log_);
  log_ = TrajectoryLog{};
  return last_log_;
}

void Engine::run_action(const EventAction& action) {
  std::visit(
      [this](const auto& a) {
        using T = std::decay_t<decltype(a)>;
        if constexpr (std::is_same_v<T, StartPosAction>) {
          start_pos(a.channel, a.axis, a.target, a.spec);
        } else if constexpr (std::is_same_v<T, StartPathAction>) {
          start_path(a.channel, a.segment);
        } else {
          set_output_bit(a.bit, a.level);
        }
      },
      action);
}

bool Engine::evaluate(Monitor& m) {
  const auto& c = m.binding.condition;
  switch (c.kind) {
    case EventKind::DistanceToTarget: {
      const AxisState& axis = axes_[slot(c.axis)];
      return axis.last_target && std::abs(*axis.last_target - axis.position) <= c.value;
    }
    case EventKind::PositionReached: {
      const double pos = axes_[slot(c.axis)].position;
      const bool hit = pos == c.value || (m.previous - c.value) * (pos - c.value) < 0.0;
      m.previous = pos;
      return hit;
    }
    case EventKind::InputEdge: {
      const int level = inputs_[static_cast<std::size_t>(c.bit)];
      const bool edge = level == c.level && static_cast<int>(m.previous) != c.level;
      m.previous = level;
      return edge;
    }
  }
  return false;
}

void Engine::tick() {
  require_phase(DevicePhase::Communicating, "tick");

  // (1) actions latched during the previous tick; they behave as if issued
  // at the end of that tick.
  for (auto& m : monitors_) {
    if (m.latched && !m.fired) {
      m.fired = true;
      if (m.binding.action) {
        ++m.action_count;
        run_action(*m.binding.action);
      }
    }
  }

  ++time_ms_;

  // (2) motion update
  for (auto it = motions_.begin(); it != motions_.end();) {
    const double elapsed = static_cast<double>(time_ms_ - it->start_ms) * kTickSeconds;
    const bool done = elapsed >= it->duration - kCompletionSlack;
    std::visit(
        [&](const auto& plan) {
          using T = std::decay_t<decltype(plan)>;
          if constexpr (std::is_same_v<T, profiles::ProfilePlan>) {
            AxisState& axis = axes_[it->axis_slots.front()];
            if (done) {
              axis.position = plan.target_pos;
              axis.velocity = 0.0;
            } else {
              const auto s = profiles::sample_profile(plan, elapsed);
              axis.position = s.position;
              axis.velocity = s.velocity;
            }
          } else {
            interp::PathState st;
            if constexpr (std::is_same_v<T, interp::PathPlan>) {
              st = interp::sample_path_state(plan, done ? plan.duration() : elapsed);
            } else {
              st = interp::sample_lookahead(plan, done ? plan.total_duration : elapsed);
            }
            for (std::size_t i = 0; i < it->axis_slots.size(); ++i) {
              AxisState& axis = axes_[it->axis_slots[i]];
              axis.position = st.position[i];
              axis.velocity = done ? 0.0 : st.velocity[i];
            }
          }
        },
        it->plan);
    if (done) {
      for (std::size_t s : it->axis_slots) axes_[s].busy = false;
      it = motions_.erase(it);
    } else {
      ++it;
    }
  }

  // (3) event monitors
  for (auto& m : monitors_) {
    if (m.latched) continue;
    if (evaluate(m)) {
      m.latched = true;
      if (!m.binding.action) m.fired = true;
    }
  }

  // (4) log
  if (logging_) append_log_row();
}

void Engine::append_log_row() {
  log_.t_ms.push_back(time_ms_);
  for (std::size_t i = 0; i < log_axis_slots_.size(); ++i) {
    const AxisState& axis = axes_[log_axis_slots_[i]];
    log_.positions[i].push_back(axis.position);
    log_.velocities[i].push_back(axis.velocity);
  }
  for (std::size_t i = 0; i < log_.inputs.size(); ++i)
    log_.input_bits[i].push_back(inputs_[static_cast<std::size_t>(log_.inputs[i])]);
  for (std::size_t i = 0; i < log_.outputs.size(); ++i)
    log_.output_bits[i].push_back(outputs_[static_cast<std::size_t>(log_.outputs[i])]);
}

RunResult Engine::close_device() {
  if (closed_result_) return *closed_result_;
  RunResult result;
  for (const auto& axis : axes_)
    if (axis.busy) result.warnings.push_back("axis " + std::to_string(axis.id) + " still moving");
  if (logging_) stop_log();
  phase_ = DevicePhase::Closed;
  result.log = last_log_;
  result.final_state = snapshot();
  closed_result_ = result;
  return result;
}

double Engine::position(int axis) const { return axes_[slot(axis)].position; }
double Engine::velocity(int axis) const { return axes_[slot(axis)].velocity; }
bool Engine::axis_busy(int axis) const { return axes_[slot(axis)].busy; }

EngineSnapshot Engine::snapshot() const {
  EngineSnapshot snap;
  snap.time_ms = time_ms_;
  snap.phase = phase_;
  for (const auto& a : axes_) snap.axes.push_back({a.id, a.position, a.velocity, a.busy});
  snap.inputs = inputs_;
  snap.outputs = outputs_;
  std::set<int> channels;
  for (const auto& m : motions_) channels.insert(m.channel);
  snap.busy_channels.assign(channels.begin(), channels.end());
  return snap;
}

}  // namespace mocsim::engine
