#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mocsim/mcscript.hpp"
#include "mocsim/trajectory_log.hpp"

namespace mocsim::verify {

inline constexpr double kDefaultEndpointTolerance = 1e-3;
inline constexpr double kDefaultDtwTolerance = 1e-3;

enum class Method { EndPoints, DTW };

std::string_view to_string(Method method);

struct AxisDelta {
  int axis = 0;
  double delta = 0.0;  // infinity when the candidate lacks the column
  bool missing = false;
  bool within = false;
};

struct ComparisonReport {
  bool passed = false;
  Method method = Method::EndPoints;
  std::vector<AxisDelta> deltas;  // one per canonical axis column
  std::optional<double> dtw_distance;  // normalized by warp-path length
  std::vector<std::string> notes;
};

/// Compares final positions of every canonical axis column. Throws EmptyLog.
ComparisonReport match_endpoints(const TrajectoryLog& canonical, const TrajectoryLog& candidate,
                                 double tol = kDefaultEndpointTolerance);

using Series = std::vector<std::vector<double>>;
using WarpPath = std::vector<std::pair<std::size_t, std::size_t>>;

struct DtwResult {
  double distance = 0.0;
  WarpPath path;  // from (0,0) to (n-1,m-1)
};

/// Classic DTW with L1 point cost. On equal predecessors the path prefers
/// the diagonal, then (i-1, j), then (i, j-1). Throws EmptySeries or
/// DimensionMismatch. Uses O(n*m) memory; see dtw_pass for long logs.
DtwResult dtw_distance(const Series& a, const Series& b);

/// Same total cost and path length as dtw_distance, in O(m) memory.
std::pair<double, std::size_t> dtw_cost_and_length(const Series& a, const Series& b);

/// Passes when the normalized DTW distance over the canonical axis columns
/// is within tol and the endpoints also match at tol. Throws EmptyLog.
ComparisonReport dtw_pass(const TrajectoryLog& canonical, const TrajectoryLog& candidate,
                          double tol = kDefaultDtwTolerance);

struct MethodFlags {
  bool endpoints = false;
  bool dtw = false;

  bool get(Method m) const { return m == Method::EndPoints ? endpoints : dtw; }
};

struct EvalOutcome {
  std::string task_id;
  int difficulty = 1;
  Method required_method = Method::EndPoints;
  MethodFlags first_attempt_passed;  // attempt 1 only
  MethodFlags final_passed;          // after self-correction
  int attempts = 0;
  std::optional<mcscript::DiagnosticCategory> error_category;  // attempt 1 failure
  std::string error_message;
  std::vector<AxisDelta> endpoint_deltas;  // attempt 1 vs canonical
  std::optional<double> dtw_distance;
};

/// 100 * passed / total rounded to two decimals. Throws EmptyInput for total 0.
double ftpr(std::size_t passed, std::size_t total);
/// First-attempt pass rate under `method`.
double ftpr(std::span<const EvalOutcome> outcomes, Method method);
double pass_after_correction(std::span<const EvalOutcome> outcomes, Method method);

struct Polyline {
  std::string label;
  std::vector<std::pair<double, double>> points;
};

enum class PlotKind { Time, XY, Isometric, IO };

struct Plot {
  std::string file_name;
  PlotKind kind = PlotKind::Time;
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Polyline> series;
  std::vector<int> axes;  // source axes, for XY and isometric plots
};

/// Plot data: one position-vs-time plot per axis, one XY plot per
/// consecutive axis pair, one isometric plot of the first three axes, and a
/// step plot of all logged I/O bits. XY points are raw positions, unscaled.
/// Throws EmptyLog.
std::vector<Plot> build_plots(const TrajectoryLog& log);

std::string render_svg(const Plot& plot);

/// Writes every plot as SVG into `dir` (created if needed) and returns the
/// paths. Throws EmptyLog or IoFailure.
std::vector<std::filesystem::path> emit_plots(const TrajectoryLog& log, const std::filesystem::path& dir);

}  // namespace mocsim::verify
