#pragma once

// Statement-to-engine argument conversion, shared by the validator and the
// interpreter so both see the same motion. Every function throws
// Error(InvalidArgument) on a missing or ill-typed argument.

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mocsim/interp.hpp"
#include "mocsim/mcscript.hpp"
#include "mocsim/profiles.hpp"

namespace mocsim::mcscript::detail {

double number_arg(const Statement& st, std::string_view key);
std::optional<double> optional_number(const Statement& st, std::string_view key);
int int_arg(const Statement& st, std::string_view key);
std::optional<int> optional_int(const Statement& st, std::string_view key);
std::vector<double> list_arg(const Statement& st, std::string_view key);
std::vector<int> int_list_arg(const Statement& st, std::string_view key);
std::optional<std::vector<int>> optional_int_list(const Statement& st, std::string_view key);
std::string word_arg(const Statement& st, std::string_view key);

/// "<enum_name> has no attribute <word>. Did you mean: <best>?"
std::string enum_error(std::string_view enum_name, std::string_view word,
                       std::span<const std::string_view> vocabulary);

/// Exact member of `vocabulary` or Error(InvalidArgument) with enum_error.
std::string enum_arg(const Statement& st, std::string_view key, std::string_view enum_name,
                     std::span<const std::string_view> vocabulary);

profiles::ProfileType profile_type_from(std::string_view name);
profiles::ProfileSpec spec_from(const Statement& st);
int channel_from(const Statement& st);

/// `command` is one of StartLinear, StartCircular, StartHelical, StartSpline.
interp::PathSegment path_from(const Statement& st, std::string_view command);

struct LookaheadArgs {
  std::vector<int> axes;
  std::vector<interp::PathSegment> segments;
  profiles::ProfileSpec limits;
  double tolerance = interp::kDefaultCornerTolerance;
};

LookaheadArgs lookahead_from(const Statement& st);

/// Splits a flat coordinate list into points of `dim` coordinates.
std::vector<interp::Point> points_from(const std::vector<double>& flat, std::size_t dim, std::string_view key);

}  // namespace mocsim::mcscript::detail
