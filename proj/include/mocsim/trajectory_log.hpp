#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mocsim {

/// Fixed-cadence record of commanded axis state and I/O bits, one row per
/// 1 ms tick. Stored column-wise; every column has rows() entries.
struct TrajectoryLog {
  std::vector<int> axes;
  std::vector<int> inputs;
  std::vector<int> outputs;

  std::vector<std::int64_t> t_ms;
  std::vector<std::vector<double>> positions;   // [axis column][row]
  std::vector<std::vector<double>> velocities;  // [axis column][row]
  std::vector<std::vector<std::uint8_t>> input_bits;
  std::vector<std::vector<std::uint8_t>> output_bits;

  std::size_t rows() const { return t_ms.size(); }
  bool empty() const { return t_ms.empty(); }

  /// Index into `axes` or -1.
  int axis_column(int axis) const;

  std::vector<std::string> column_names() const;
};

/// `t_ms,ax<k>_pos,ax<k>_vel,...,in<j>,...,out<j>`, values with six decimals,
/// LF line endings.
std::string to_csv(const TrajectoryLog& log);
void write_csv(const TrajectoryLog& log, const std::filesystem::path& path);

/// Inverse of to_csv. Velocity columns are optional on input. Throws
/// Error(SchemaError) on malformed content, Error(IoFailure) on read errors.
TrajectoryLog parse_csv(std::string_view text);
TrajectoryLog read_csv(const std::filesystem::path& path);

}  // namespace mocsim
