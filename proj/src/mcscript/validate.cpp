#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "build.hpp"
#include "mocsim/error.hpp"
#include "mocsim/mcscript.hpp"
#include "text.hpp"

namespace mocsim::mcscript {
namespace {

using detail::list_text;
using detail::number_text;

constexpr double kInf = std::numeric_limits<double>::infinity();

constexpr std::string_view kCommands[] = {
    "CloseDevice", "CreateDevice",  "OnEvent",      "SetEvent",    "SetIn",          "SetOut",
    "Sleep",       "StartCircular", "StartCommunication", "StartHelical", "StartLinear", "StartLog",
    "StartLookahead", "StartPos",   "StartSpline",  "StopLog",     "Wait",           "WaitEvent",
};
constexpr std::string_view kProfiles[] = {"JerkRatio", "SCurve", "Trapezoidal"};
constexpr std::string_view kEventTypes[] = {"DistanceToTarget", "InputEdge", "PositionReached"};
constexpr std::string_view kActions[] = {"SetOut",      "StartCircular", "StartHelical",
                                         "StartLinear", "StartPos",      "StartSpline"};

enum class ArgType { Int, Number, IntList, NumList, Enum };

struct KeySpec {
  std::string_view name;
  ArgType type = ArgType::Number;
  bool required = false;
  double lo = -kInf;
  double hi = kInf;
  bool lo_open = false;
  std::string_view enum_name{};
  std::span<const std::string_view> vocab{};
};

KeySpec key(std::string_view name, ArgType type, bool required, double lo = -kInf, double hi = kInf,
            bool lo_open = false) {
  return {name, type, required, lo, hi, lo_open, {}, {}};
}

KeySpec enum_key(std::string_view name, bool required, std::string_view enum_name,
                 std::span<const std::string_view> vocab) {
  return {name, ArgType::Enum, required, -kInf, kInf, false, enum_name, vocab};
}

std::vector<KeySpec> with_limits(std::vector<KeySpec> keys) {
  keys.push_back(key("vel", ArgType::Number, true, 0, kInf, true));
  keys.push_back(key("acc", ArgType::Number, true, 0, kInf, true));
  keys.push_back(key("dec", ArgType::Number, false, 0, kInf, true));
  keys.push_back(enum_key("profile", false, "ProfileType", kProfiles));
  keys.push_back(key("jerk_acc_ratio", ArgType::Number, false, 0, 1));
  keys.push_back(key("end_vel", ArgType::Number, false, 0));
  keys.push_back(key("channel", ArgType::Int, false, 0, engine::kMaxChannels - 1));
  return keys;
}

const std::vector<KeySpec>& keys_for(std::string_view command) {
  static const std::map<std::string_view, std::vector<KeySpec>> table = [] {
    std::map<std::string_view, std::vector<KeySpec>> t;
    t["CreateDevice"] = {key("axes", ArgType::IntList, false, 0),
                         key("inputs", ArgType::Int, false, 0, engine::kMaxBits),
                         key("outputs", ArgType::Int, false, 0, engine::kMaxBits)};
    t["StartCommunication"] = {};
    t["StartLog"] = {key("axes", ArgType::IntList, false, 0), key("inputs", ArgType::IntList, false, 0),
                     key("outputs", ArgType::IntList, false, 0)};
    t["StopLog"] = {};
    t["CloseDevice"] = {};
    t["StartPos"] = with_limits({key("axis", ArgType::Int, true), key("target", ArgType::Number, true)});
    t["StartLinear"] = with_limits({key("axes", ArgType::IntList, true), key("target", ArgType::NumList, true)});
    t["StartCircular"] = with_limits({key("axes", ArgType::IntList, true), key("center", ArgType::NumList, true),
                                      key("angle", ArgType::Number, true)});
    t["StartHelical"] = with_limits({key("axes", ArgType::IntList, true), key("center", ArgType::NumList, true),
                                     key("angle", ArgType::Number, true), key("target", ArgType::Number, true)});
    t["StartSpline"] = with_limits({key("axes", ArgType::IntList, true), key("points", ArgType::NumList, true)});
    t["StartLookahead"] = with_limits({key("axes", ArgType::IntList, true), key("points", ArgType::NumList, true),
                                       key("tolerance", ArgType::Number, false, 0, kInf, true)});
    t["SetEvent"] = {key("id", ArgType::Int, true, 0),
                     enum_key("type", true, "EventType", kEventTypes),
                     key("axis", ArgType::Int, false),
                     key("value", ArgType::Number, false),
                     key("bit", ArgType::Int, false),
                     key("level", ArgType::Int, false, 0, 1)};
    t["WaitEvent"] = {key("id", ArgType::Int, true, 0)};
    t["Wait"] = {key("axis", ArgType::Int, false), key("axes", ArgType::IntList, false)};
    t["Sleep"] = {key("ms", ArgType::Int, true, 0)};
    t["SetOut"] = {key("bit", ArgType::Int, true), key("level", ArgType::Int, true, 0, 1)};
    t["SetIn"] = {key("bit", ArgType::Int, true), key("level", ArgType::Int, true, 0, 1)};
    return t;
  }();
  static const std::vector<KeySpec> none;
  auto it = table.find(command);
  return it == table.end() ? none : it->second;
}

std::string normalize(std::string_view s) {
  std::string out;
  for (char c : s)
    if (c != ' ' && c != '_') out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

bool is_integral(double v) { return v == std::floor(v) && std::abs(v) <= std::numeric_limits<int>::max(); }

enum class Phase { None, Created, Communicating, Closed };

const char* phase_name(Phase p) {
  switch (p) {
    case Phase::None: return "absent";
    case Phase::Created: return "Created";
    case Phase::Communicating: return "Communicating";
    case Phase::Closed: return "Closed";
  }
  return "?";
}

class Validator {
 public:
  Validator(const Program& program, const engine::DeviceConfig& config) : program_(program), config_(config) {}

  std::vector<Diagnostic> run() {
    const bool has_create = std::any_of(program_.statements.begin(), program_.statements.end(),
                                        [](const Statement& s) { return s.command == "CreateDevice"; });
    if (!has_create) {
      // A bare motion body runs on the default device, already communicating.
      open_device(config_);
      phase_ = Phase::Communicating;
    }
    for (const auto& st : program_.statements) statement(st);
    return std::move(out_);
  }

 private:
  void report(DiagnosticCategory category, SourceLocation loc, std::string message,
              std::optional<std::string> suggestion = std::nullopt) {
    if (suggestion) message += " Did you mean: " + *suggestion + "?";
    out_.push_back({category, std::move(message), loc, std::move(suggestion)});
  }

  void argument_error(SourceLocation loc, std::string message) {
    report(DiagnosticCategory::Argument, loc, std::move(message));
  }

  void open_device(const engine::DeviceConfig& cfg) {
    device_ = cfg;
    positions_.clear();
    for (int a : cfg.axes) positions_[a] = 0.0;
  }

  void statement(const Statement& st) {
    if (std::find(std::begin(kCommands), std::end(kCommands), st.command) == std::end(kCommands)) {
      report(DiagnosticCategory::Api, st.location, "Unknown command " + st.command + ".",
             suggest(st.command, kCommands));
      return;
    }
    if (st.command == "OnEvent") {
      on_event(st);
      return;
    }
    if (!check_keys(st, keys_for(st.command))) return;
    semantics(st);
  }

  bool check_keys(const Statement& st, const std::vector<KeySpec>& keys) {
    bool ok = true;
    std::set<std::string> seen;
    std::vector<std::string_view> names;
    for (const auto& k : keys) names.push_back(k.name);
    for (const auto& arg : st.args) {
      if (!seen.insert(arg.key).second) {
        argument_error(arg.location, "duplicate argument '" + arg.key + "'");
        ok = false;
        continue;
      }
      auto spec = std::find_if(keys.begin(), keys.end(), [&](const KeySpec& k) { return k.name == arg.key; });
      if (spec == keys.end()) {
        report(DiagnosticCategory::Argument, arg.location, st.command + " has no argument " + arg.key + ".",
               suggest(arg.key, names));
        ok = false;
        continue;
      }
      ok = check_value(arg, *spec) && ok;
    }
    for (const auto& k : keys) {
      if (k.required && !seen.count(std::string(k.name))) {
        argument_error(st.location, st.command + " needs '" + std::string(k.name) + "'");
        ok = false;
      }
    }
    return ok;
  }

  bool check_range(const Argument& arg, const KeySpec& k, double v) {
    const std::string name = "'" + arg.key + "'";
    if (k.lo_open ? !(v > k.lo) : !(v >= k.lo)) {
      argument_error(arg.value.location,
                     name + " must be " + (k.lo_open ? "> " : ">= ") + number_text(k.lo) + ", got " + number_text(v));
      return false;
    }
    if (!(v <= k.hi)) {
      argument_error(arg.value.location, name + " must be <= " + number_text(k.hi) + ", got " + number_text(v));
      return false;
    }
    return true;
  }

  bool check_value(const Argument& arg, const KeySpec& k) {
    const Value& v = arg.value;
    const std::string name = "'" + arg.key + "'";
    switch (k.type) {
      case ArgType::Number:
      case ArgType::Int:
        if (v.kind != Value::Kind::Number) {
          argument_error(v.location, name + " must be a number");
          return false;
        }
        if (k.type == ArgType::Int && !is_integral(v.number)) {
          argument_error(v.location, name + " must be an integer, got " + number_text(v.number));
          return false;
        }
        return check_range(arg, k, v.number);
      case ArgType::IntList:
      case ArgType::NumList:
        if (v.kind != Value::Kind::List) {
          argument_error(v.location, name + " must be a list");
          return false;
        }
        for (double x : v.list) {
          if (k.type == ArgType::IntList && !is_integral(x)) {
            argument_error(v.location, name + " must hold integers, got " + number_text(x));
            return false;
          }
          if (!check_range(arg, k, x)) return false;
        }
        return true;
      case ArgType::Enum: {
        std::string word = v.kind == Value::Kind::Word ? v.word : number_text(v.number);
        if (v.kind == Value::Kind::List) word = list_text(v.list);
        if (std::find(k.vocab.begin(), k.vocab.end(), word) != k.vocab.end()) return true;
        auto s = suggest(word, k.vocab);
        std::string message = std::string(k.enum_name) + " has no attribute " + word + ".";
        report(DiagnosticCategory::Argument, v.location, std::move(message), std::move(s));
        return false;
      }
    }
    return false;
  }

  bool require_phase(const Statement& st, Phase wanted) {
    if (phase_ == wanted) return true;
    if (phase_ == Phase::None) {
      argument_error(st.location, st.command + " before CreateDevice");
    } else {
      argument_error(st.location, st.command + " requires the device to be " + phase_name(wanted) + " but it is " +
                                      phase_name(phase_));
    }
    return false;
  }

  bool check_axis(int axis, SourceLocation loc) {
    if (positions_.count(axis)) return true;
    argument_error(loc, "unknown axis " + std::to_string(axis) + "; configured axes are " + list_text(device_->axes));
    return false;
  }

  bool check_axes(const Statement& st, std::string_view key, const std::vector<int>& axes) {
    const SourceLocation loc = st.find(key)->value.location;
    if (axes.empty()) {
      argument_error(loc, "'" + std::string(key) + "' must not be empty");
      return false;
    }
    std::set<int> seen;
    for (int a : axes) {
      if (!check_axis(a, loc)) return false;
      if (!seen.insert(a).second) {
        argument_error(loc, "axis " + std::to_string(a) + " listed twice");
        return false;
      }
    }
    return true;
  }

  bool check_bits(const std::vector<int>& bits, int count, const char* kind, SourceLocation loc) {
    std::set<int> seen;
    for (int b : bits) {
      if (b < 0 || b >= count) {
        argument_error(loc, std::string("unknown ") + kind + " bit " + std::to_string(b) + "; the device has " +
                                std::to_string(count));
        return false;
      }
      if (!seen.insert(b).second) {
        argument_error(loc, std::string(kind) + " bit " + std::to_string(b) + " listed twice");
        return false;
      }
    }
    return true;
  }

  interp::Point start_point(const std::vector<int>& axes) {
    interp::Point p;
    for (int a : axes) p.push_back(positions_.at(a));
    return p;
  }

  void set_point(const std::vector<int>& axes, const interp::Point& p) {
    for (std::size_t i = 0; i < axes.size() && i < p.size(); ++i) positions_[axes[i]] = p[i];
  }

  // Checks a motion or output command; also used for event actions.
  void action(const Statement& st, std::string_view command) {
    try {
      if (command == "SetOut") {
        const int bit = detail::int_arg(st, "bit");
        check_bits({bit}, device_->output_bits, "output", st.find("bit")->value.location);
        return;
      }
      if (command == "StartPos") {
        const int axis = detail::int_arg(st, "axis");
        if (!check_axis(axis, st.find("axis")->value.location)) return;
        detail::spec_from(st);
        positions_[axis] = detail::number_arg(st, "target");
        return;
      }
      const auto axes = detail::int_list_arg(st, "axes");
      if (!check_axes(st, "axes", axes)) return;
      if (command == "StartLookahead") {
        const auto args = detail::lookahead_from(st);
        const auto plan = interp::plan_lookahead(start_point(axes), args.segments, args.limits, args.tolerance);
        set_point(axes, plan.plans.back().terminal_point());
        return;
      }
      const auto segment = detail::path_from(st, command);
      const auto plan = interp::plan_path(start_point(axes), segment);
      set_point(axes, plan.terminal_point());
    } catch (const Error& e) {
      argument_error(st.location, e.what());
    }
  }

  void on_event(const Statement& st) {
    const Argument* act = st.find("action");
    if (!act) {
      argument_error(st.location, "OnEvent needs 'action'");
      return;
    }
    std::vector<KeySpec> keys{key("id", ArgType::Int, true, 0), enum_key("action", true, "EventAction", kActions)};
    if (!check_value(*act, keys[1])) return;
    const std::string command = act->value.word;
    for (const auto& k : keys_for(command)) keys.push_back(k);
    if (!check_keys(st, keys)) return;
    if (!require_phase(st, Phase::Communicating)) return;
    const int id = detail::int_arg(st, "id");
    if (!events_.count(id)) {
      argument_error(st.find("id")->value.location, "unknown event " + std::to_string(id));
      return;
    }
    action(st, command);
  }

  void set_event(const Statement& st) {
    const int id = detail::int_arg(st, "id");
    if (events_.count(id)) {
      argument_error(st.find("id")->value.location, "event " + std::to_string(id) + " already defined");
      return;
    }
    const std::string type = st.find("type")->value.word;
    const bool on_input = type == "InputEdge";
    const std::vector<std::string_view> used = on_input ? std::vector<std::string_view>{"bit", "level"}
                                                        : std::vector<std::string_view>{"axis", "value"};
    for (const char* k : {"axis", "value", "bit", "level"}) {
      const Argument* a = st.find(k);
      const bool wanted = std::find(used.begin(), used.end(), k) != used.end();
      if (a && !wanted) {
        argument_error(a->location, "'" + std::string(k) + "' is not used by " + type);
        return;
      }
      if (!a && wanted && std::string_view(k) != "level") {
        argument_error(st.location, type + " needs '" + k + "'");
        return;
      }
    }
    if (on_input) {
      if (!check_bits({detail::int_arg(st, "bit")}, device_->input_bits, "input", st.find("bit")->value.location))
        return;
    } else if (!check_axis(detail::int_arg(st, "axis"), st.find("axis")->value.location)) {
      return;
    }
    events_.insert(id);
  }

  void semantics(const Statement& st) {
    const std::string& c = st.command;
    if (c == "CreateDevice") {
      if (phase_ != Phase::None) {
        argument_error(st.location, "device already created");
        return;
      }
      engine::DeviceConfig cfg = config_;
      if (auto axes = detail::optional_int_list(st, "axes")) cfg.axes = *axes;
      cfg.input_bits = detail::optional_int(st, "inputs").value_or(config_.input_bits);
      cfg.output_bits = detail::optional_int(st, "outputs").value_or(config_.output_bits);
      try {
        engine::validate(cfg);
      } catch (const Error& e) {
        argument_error(st.location, e.what());
        return;
      }
      open_device(cfg);
      phase_ = Phase::Created;
      return;
    }
    if (c == "StartCommunication") {
      if (require_phase(st, Phase::Created)) phase_ = Phase::Communicating;
      return;
    }
    if (c == "CloseDevice") {
      if (phase_ == Phase::None) {
        argument_error(st.location, "CloseDevice before CreateDevice");
        return;
      }
      phase_ = Phase::Closed;
      logging_ = false;
      return;
    }
    if (!require_phase(st, Phase::Communicating)) return;

    if (c == "StartLog") {
      if (logging_) {
        argument_error(st.location, "logging already started");
        return;
      }
      if (auto axes = detail::optional_int_list(st, "axes")) {
        std::set<int> seen;
        for (int a : *axes) {
          if (!check_axis(a, st.find("axes")->value.location)) return;
          if (!seen.insert(a).second) {
            argument_error(st.find("axes")->value.location, "axis " + std::to_string(a) + " listed twice");
            return;
          }
        }
      }
      if (auto in = detail::optional_int_list(st, "inputs"))
        if (!check_bits(*in, device_->input_bits, "input", st.find("inputs")->value.location)) return;
      if (auto out = detail::optional_int_list(st, "outputs"))
        if (!check_bits(*out, device_->output_bits, "output", st.find("outputs")->value.location)) return;
      logging_ = true;
    } else if (c == "StopLog") {
      if (!logging_) {
        argument_error(st.location, "logging was not started");
        return;
      }
      logging_ = false;
    } else if (c == "SetEvent") {
      set_event(st);
    } else if (c == "WaitEvent") {
      const int id = detail::int_arg(st, "id");
      if (!events_.count(id)) argument_error(st.find("id")->value.location, "unknown event " + std::to_string(id));
    } else if (c == "Wait") {
      const bool one = st.find("axis") != nullptr;
      if (one == (st.find("axes") != nullptr)) {
        argument_error(st.location, "Wait needs exactly one of 'axis' or 'axes'");
        return;
      }
      if (one) {
        check_axis(detail::int_arg(st, "axis"), st.find("axis")->value.location);
      } else {
        check_axes(st, "axes", detail::int_list_arg(st, "axes"));
      }
    } else if (c == "SetIn") {
      check_bits({detail::int_arg(st, "bit")}, device_->input_bits, "input", st.find("bit")->value.location);
    } else if (c == "Sleep") {
      // ms already range-checked
    } else {
      action(st, c);
    }
  }

  const Program& program_;
  engine::DeviceConfig config_;
  std::optional<engine::DeviceConfig> device_;
  Phase phase_ = Phase::None;
  bool logging_ = false;
  std::map<int, double> positions_;
  std::set<int> events_;
  std::vector<Diagnostic> out_;
};

Statement make(std::string command, std::vector<std::pair<std::string, Value>> args = {}) {
  Statement st;
  st.command = std::move(command);
  for (auto& [k, v] : args) st.args.push_back({k, std::move(v), {}});
  return st;
}

std::vector<double> iota_list(int n) {
  std::vector<double> out;
  for (int i = 0; i < n; ++i) out.push_back(i);
  return out;
}

}  // namespace

std::span<const std::string_view> command_vocabulary() { return kCommands; }
std::span<const std::string_view> profile_vocabulary() { return kProfiles; }

std::size_t edit_distance(std::string_view a, std::string_view b) {
  std::vector<std::size_t> row(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) row[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    std::size_t diag = row[0];
    row[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t up = row[j];
      row[j] = std::min({row[j] + 1, row[j - 1] + 1, diag + (a[i - 1] == b[j - 1] ? 0 : 1)});
      diag = up;
    }
  }
  return row[b.size()];
}

std::optional<std::string> suggest(std::string_view token, std::span<const std::string_view> vocabulary) {
  const std::string t = normalize(token);
  std::optional<std::string_view> best;
  std::size_t best_d = 3;
  for (auto entry : vocabulary) {
    const std::size_t d = edit_distance(t, normalize(entry));
    if (d < best_d || (d == best_d && best && entry < *best)) {
      best = entry;
      best_d = d;
    }
  }
  if (!best) return std::nullopt;
  return std::string(*best);
}

std::vector<Diagnostic> validate(const Program& program, const engine::DeviceConfig& config) {
  return Validator(program, config).run();
}

Program preprocess(const Program& program, const engine::DeviceConfig& config) {
  auto has = [&](std::string_view c) {
    return std::any_of(program.statements.begin(), program.statements.end(),
                       [&](const Statement& s) { return s.command == c; });
  };
  auto index_of = [](const std::vector<Statement>& v, std::string_view c) -> std::ptrdiff_t {
    for (std::size_t i = 0; i < v.size(); ++i)
      if (v[i].command == c) return static_cast<std::ptrdiff_t>(i);
    return -1;
  };
  // An explicit CreateDevice decides what the default StartLog covers.
  engine::DeviceConfig device = config;
  for (const auto& st : program.statements) {
    if (st.command != "CreateDevice") continue;
    try {
      if (auto a = detail::optional_int_list(st, "axes")) device.axes = *a;
      device.input_bits = detail::optional_int(st, "inputs").value_or(config.input_bits);
      device.output_bits = detail::optional_int(st, "outputs").value_or(config.output_bits);
    } catch (const Error&) {
      device = config;
    }
    break;
  }
  std::vector<double> axes(device.axes.begin(), device.axes.end());

  Program out = program;
  auto& sts = out.statements;
  if (!has("CreateDevice")) {
    sts.insert(sts.begin(), make("CreateDevice", {{"axes", Value::of_list(axes)},
                                                  {"inputs", Value::of_number(config.input_bits)},
                                                  {"outputs", Value::of_number(config.output_bits)}}));
  }
  if (!has("StartCommunication"))
    sts.insert(sts.begin() + index_of(sts, "CreateDevice") + 1, make("StartCommunication"));
  if (!has("StartLog")) {
    sts.insert(sts.begin() + index_of(sts, "StartCommunication") + 1,
               make("StartLog", {{"axes", Value::of_list(axes)},
                                 {"inputs", Value::of_list(iota_list(device.input_bits))},
                                 {"outputs", Value::of_list(iota_list(device.output_bits))}}));
  }
  if (!has("StopLog")) {
    const auto close = index_of(sts, "CloseDevice");
    sts.insert(close < 0 ? sts.end() : sts.begin() + close, make("StopLog"));
  }
  if (!has("CloseDevice")) sts.push_back(make("CloseDevice"));
  return out;
}

}  // namespace mocsim::mcscript
