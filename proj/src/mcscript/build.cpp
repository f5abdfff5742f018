#include "build.hpp"

#include <cmath>
#include <limits>

#include "mocsim/error.hpp"
#include "text.hpp"

namespace mocsim::mcscript::detail {
namespace {

[[noreturn]] void bad(const std::string& message) { throw Error(ErrorCode::InvalidArgument, message); }

const Argument& required(const Statement& st, std::string_view key) {
  const Argument* a = st.find(key);
  if (!a) bad(st.command + " needs '" + std::string(key) + "'");
  return *a;
}

int to_int(double v, std::string_view key) {
  if (v != std::floor(v) || std::abs(v) > std::numeric_limits<int>::max())
    bad("'" + std::string(key) + "' must be an integer, got " + number_text(v));
  return static_cast<int>(v);
}

}  // namespace

double number_arg(const Statement& st, std::string_view key) {
  const Argument& a = required(st, key);
  if (a.value.kind != Value::Kind::Number) bad("'" + std::string(key) + "' must be a number");
  return a.value.number;
}

std::optional<double> optional_number(const Statement& st, std::string_view key) {
  if (!st.find(key)) return std::nullopt;
  return number_arg(st, key);
}

int int_arg(const Statement& st, std::string_view key) { return to_int(number_arg(st, key), key); }

std::optional<int> optional_int(const Statement& st, std::string_view key) {
  if (!st.find(key)) return std::nullopt;
  return int_arg(st, key);
}

std::vector<double> list_arg(const Statement& st, std::string_view key) {
  const Argument& a = required(st, key);
  if (a.value.kind != Value::Kind::List) bad("'" + std::string(key) + "' must be a list");
  return a.value.list;
}

std::vector<int> int_list_arg(const Statement& st, std::string_view key) {
  std::vector<int> out;
  for (double v : list_arg(st, key)) out.push_back(to_int(v, key));
  return out;
}

std::optional<std::vector<int>> optional_int_list(const Statement& st, std::string_view key) {
  if (!st.find(key)) return std::nullopt;
  return int_list_arg(st, key);
}

std::string word_arg(const Statement& st, std::string_view key) {
  const Argument& a = required(st, key);
  if (a.value.kind != Value::Kind::Word) bad("'" + std::string(key) + "' must be a name");
  return a.value.word;
}

std::string enum_error(std::string_view enum_name, std::string_view word,
                       std::span<const std::string_view> vocabulary) {
  std::string message = std::string(enum_name) + " has no attribute " + std::string(word) + ".";
  if (auto s = suggest(word, vocabulary)) message += " Did you mean: " + *s + "?";
  return message;
}

std::string enum_arg(const Statement& st, std::string_view key, std::string_view enum_name,
                     std::span<const std::string_view> vocabulary) {
  const Argument& a = required(st, key);
  std::string word = a.value.kind == Value::Kind::Word ? a.value.word : number_text(a.value.number);
  if (a.value.kind == Value::Kind::List) word = list_text(a.value.list);
  for (auto v : vocabulary)
    if (v == word) return word;
  bad(enum_error(enum_name, word, vocabulary));
}

profiles::ProfileType profile_type_from(std::string_view name) {
  if (name == "Trapezoidal") return profiles::ProfileType::Trapezoidal;
  if (name == "SCurve") return profiles::ProfileType::SCurve;
  if (name == "JerkRatio") return profiles::ProfileType::JerkRatio;
  bad(enum_error("ProfileType", name, profile_vocabulary()));
}

profiles::ProfileSpec spec_from(const Statement& st) {
  auto type = profiles::ProfileType::Trapezoidal;
  if (st.find("profile")) type = profile_type_from(enum_arg(st, "profile", "ProfileType", profile_vocabulary()));
  const auto ratio = optional_number(st, "jerk_acc_ratio");
  if (type == profiles::ProfileType::JerkRatio && !ratio)
    throw Error(ErrorCode::InvalidSpec, "profile JerkRatio needs jerk_acc_ratio");
  const double acc = number_arg(st, "acc");
  auto spec = profiles::make_spec(type, number_arg(st, "vel"), acc, optional_number(st, "dec").value_or(acc),
                                  ratio.value_or(0.0), optional_number(st, "end_vel").value_or(0.0));
  profiles::validate(spec);
  return spec;
}

int channel_from(const Statement& st) { return optional_int(st, "channel").value_or(0); }

std::vector<interp::Point> points_from(const std::vector<double>& flat, std::size_t dim, std::string_view key) {
  if (dim == 0 || flat.empty() || flat.size() % dim != 0)
    throw Error(ErrorCode::DimensionMismatch, "'" + std::string(key) + "' holds " + std::to_string(flat.size()) +
                                                  " numbers, expected a non-empty multiple of " +
                                                  std::to_string(dim));
  std::vector<interp::Point> out;
  for (std::size_t i = 0; i < flat.size(); i += dim)
    out.emplace_back(flat.begin() + static_cast<std::ptrdiff_t>(i), flat.begin() + static_cast<std::ptrdiff_t>(i + dim));
  return out;
}

interp::PathSegment path_from(const Statement& st, std::string_view command) {
  const auto axes = int_list_arg(st, "axes");
  const auto spec = spec_from(st);
  auto center2 = [&]() {
    const auto c = list_arg(st, "center");
    if (c.size() != 2)
      throw Error(ErrorCode::DimensionMismatch, "'center' needs 2 coordinates, got " + std::to_string(c.size()));
    return std::array<double, 2>{c[0], c[1]};
  };
  if (command == "StartLinear") return interp::PathSegment::linear(axes, list_arg(st, "target"), spec);
  if (command == "StartCircular")
    return interp::PathSegment::circular(axes, center2(), number_arg(st, "angle"), spec);
  if (command == "StartHelical")
    return interp::PathSegment::helical(axes, center2(), number_arg(st, "angle"), number_arg(st, "target"), spec);
  if (command == "StartSpline")
    return interp::PathSegment::spline(axes, points_from(list_arg(st, "points"), axes.size(), "points"), spec);
  bad("'" + std::string(command) + "' is not a path command");
}

LookaheadArgs lookahead_from(const Statement& st) {
  LookaheadArgs out;
  out.axes = int_list_arg(st, "axes");
  out.limits = spec_from(st);
  out.tolerance = optional_number(st, "tolerance").value_or(interp::kDefaultCornerTolerance);
  for (auto& p : points_from(list_arg(st, "points"), out.axes.size(), "points"))
    out.segments.push_back(interp::PathSegment::linear(out.axes, std::move(p), out.limits));
  return out;
}

}  // namespace mocsim::mcscript::detail
