#include "mocsim/trajectory_log.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mocsim/error.hpp"

namespace mocsim {
namespace {

void append_fixed6(std::string& out, double v) {
  char buf[64];
  int n = std::snprintf(buf, sizeof buf, "%.6f", v);
  // "-0.000000" and "0.000000" must serialize identically.
  if (n > 0 && buf[0] == '-' && std::all_of(buf + 1, buf + n, [](char c) { return c == '0' || c == '.'; })) {
    out.append(buf + 1, static_cast<std::size_t>(n - 1));
    return;
  }
  out.append(buf, static_cast<std::size_t>(n));
}

std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

template <typename T>
bool parse_number(std::string_view s, T& out) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size();
}

bool parse_id(std::string_view s, std::string_view prefix, std::string_view suffix, int& id) {
  if (s.size() <= prefix.size() + suffix.size()) return false;
  if (s.substr(0, prefix.size()) != prefix) return false;
  if (s.substr(s.size() - suffix.size()) != suffix) return false;
  return parse_number(s.substr(prefix.size(), s.size() - prefix.size() - suffix.size()), id) && id >= 0;
}

}  // namespace

int TrajectoryLog::axis_column(int axis) const {
  auto it = std::find(axes.begin(), axes.end(), axis);
  return it == axes.end() ? -1 : static_cast<int>(std::distance(axes.begin(), it));
}

std::vector<std::string> TrajectoryLog::column_names() const {
  std::vector<std::string> names{"t_ms"};
  for (int a : axes) {
    names.push_back("ax" + std::to_string(a) + "_pos");
    names.push_back("ax" + std::to_string(a) + "_vel");
  }
  for (int b : inputs) names.push_back("in" + std::to_string(b));
  for (int b : outputs) names.push_back("out" + std::to_string(b));
  return names;
}

std::string to_csv(const TrajectoryLog& log) {
  std::string out;
  out.reserve(64 + log.rows() * (8 + log.axes.size() * 28 + (log.inputs.size() + log.outputs.size()) * 2));
  const auto names = log.column_names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i) out += ',';
    out += names[i];
  }
  out += '\n';
  for (std::size_t r = 0; r < log.rows(); ++r) {
    out += std::to_string(log.t_ms[r]);
    for (std::size_t a = 0; a < log.axes.size(); ++a) {
      out += ',';
      append_fixed6(out, log.positions[a][r]);
      out += ',';
      append_fixed6(out, log.velocities[a][r]);
    }
    for (const auto& col : log.input_bits) {
      out += ',';
      out += col[r] ? '1' : '0';
    }
    for (const auto& col : log.output_bits) {
      out += ',';
      out += col[r] ? '1' : '0';
    }
    out += '\n';
  }
  return out;
}

void write_csv(const TrajectoryLog& log, const std::filesystem::path& path) {
  std::ofstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  const std::string text = to_csv(log);
  file.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!file) throw Error(ErrorCode::IoFailure, "failed writing " + path.string());
}

TrajectoryLog parse_csv(std::string_view text) {
  enum class Kind { Time, Pos, Vel, In, Out };
  struct Column {
    Kind kind;
    std::size_t index;
  };

  std::vector<std::string_view> lines;
  for (auto line : split(text, '\n')) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty()) lines.push_back(line);
  }
  if (lines.empty()) throw Error(ErrorCode::SchemaError, "log has no header");

  TrajectoryLog log;
  std::vector<Column> columns;
  std::vector<bool> has_velocity;
  bool has_time = false;
  for (auto name : split(lines.front(), ',')) {
    int id = 0;
    if (name == "t_ms") {
      columns.push_back({Kind::Time, 0});
      has_time = true;
    } else if (parse_id(name, "ax", "_pos", id)) {
      if (log.axis_column(id) >= 0) throw Error(ErrorCode::SchemaError, "duplicate column " + std::string(name));
      columns.push_back({Kind::Pos, log.axes.size()});
      log.axes.push_back(id);
      has_velocity.push_back(false);
    } else if (parse_id(name, "ax", "_vel", id)) {
      const int col = log.axis_column(id);
      if (col < 0) throw Error(ErrorCode::SchemaError, "velocity column before position for axis " + std::to_string(id));
      columns.push_back({Kind::Vel, static_cast<std::size_t>(col)});
      has_velocity[static_cast<std::size_t>(col)] = true;
    } else if (parse_id(name, "in", "", id)) {
      columns.push_back({Kind::In, log.inputs.size()});
      log.inputs.push_back(id);
    } else if (parse_id(name, "out", "", id)) {
      columns.push_back({Kind::Out, log.outputs.size()});
      log.outputs.push_back(id);
    } else {
      throw Error(ErrorCode::SchemaError, "unrecognized column '" + std::string(name) + "'");
    }
  }
  if (!has_time) throw Error(ErrorCode::SchemaError, "missing t_ms column");
  log.positions.resize(log.axes.size());
  log.velocities.resize(log.axes.size());
  log.input_bits.resize(log.inputs.size());
  log.output_bits.resize(log.outputs.size());

  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto cells = split(lines[r], ',');
    if (cells.size() != columns.size())
      throw Error(ErrorCode::SchemaError, "row " + std::to_string(r) + " has " + std::to_string(cells.size()) +
                                              " cells, expected " + std::to_string(columns.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      const auto& col = columns[c];
      bool ok = true;
      switch (col.kind) {
        case Kind::Time: {
          std::int64_t t = 0;
          ok = parse_number(cells[c], t);
          log.t_ms.push_back(t);
          break;
        }
        case Kind::Pos:
        case Kind::Vel: {
          double v = 0;
          ok = parse_number(cells[c], v);
          (col.kind == Kind::Pos ? log.positions : log.velocities)[col.index].push_back(v);
          break;
        }
        case Kind::In:
        case Kind::Out: {
          int v = 0;
          ok = parse_number(cells[c], v) && (v == 0 || v == 1);
          (col.kind == Kind::In ? log.input_bits : log.output_bits)[col.index].push_back(static_cast<std::uint8_t>(v));
          break;
        }
      }
      if (!ok)
        throw Error(ErrorCode::SchemaError, "bad value '" + std::string(cells[c]) + "' in row " + std::to_string(r));
    }
    for (std::size_t a = 0; a < log.axes.size(); ++a)
      if (!has_velocity[a]) log.velocities[a].push_back(0.0);
  }
  return log;
}

TrajectoryLog read_csv(const std::filesystem::path& path) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_csv(buffer.str());
}

}  // namespace mocsim
