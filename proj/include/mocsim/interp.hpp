#pragma once

#include <array>
#include <memory>
#include <vector>

#include "mocsim/profiles.hpp"

namespace mocsim::interp {

using Point = std::vector<double>;

inline constexpr double kDefaultCornerTolerance = 0.01;

enum class PathKind { Linear, Circular, Helical, Spline };

/// A coordinated multi-axis move. Which geometry fields are meaningful
/// depends on `kind`; use the named constructors.
///
///  - Linear: `target` has one coordinate per axis.
///  - Circular: two axes; `center` and signed `sweep_deg` (CCW positive).
///    The radius is the distance from the start point to the center.
///  - Helical: three axes; the first two follow the circular arc while the
///    third moves linearly to `helical_target` in proportion to swept angle.
///  - Spline: `waypoints` after the start point (at least two, so the curve
///    has at least three points including the start).
struct PathSegment {
  PathKind kind = PathKind::Linear;
  std::vector<int> axes;
  Point target;
  std::array<double, 2> center{0.0, 0.0};
  double sweep_deg = 0.0;
  double helical_target = 0.0;
  std::vector<Point> waypoints;
  profiles::ProfileSpec limits;

  static PathSegment linear(std::vector<int> axes, Point target, profiles::ProfileSpec limits);
  static PathSegment circular(std::vector<int> axes, std::array<double, 2> center,
                              double sweep_deg, profiles::ProfileSpec limits);
  static PathSegment helical(std::vector<int> axes, std::array<double, 2> center,
                             double sweep_deg, double helical_target,
                             profiles::ProfileSpec limits);
  static PathSegment spline(std::vector<int> axes, std::vector<Point> waypoints,
                            profiles::ProfileSpec limits);
};

/// Arc-length parameterized curve. Implementations are immutable after
/// construction and safe to share between threads.
class PathGeometry {
 public:
  virtual ~PathGeometry() = default;
  virtual std::size_t dimension() const = 0;
  virtual double length() const = 0;
  /// Position at arc length s, clamped to [0, length()].
  virtual Point point(double s) const = 0;
  /// Unit tangent at arc length s.
  virtual Point tangent(double s) const = 0;
};

struct PathPlan {
  std::vector<int> axes;
  double total_arc_length = 0.0;
  profiles::ProfilePlan speed_plan;  // position along the path over time
  std::shared_ptr<const PathGeometry> geometry;

  double duration() const { return speed_plan.total_duration; }
  Point terminal_point() const { return geometry->point(total_arc_length); }
};

struct PathState {
  Point position;
  Point velocity;
};

/// Throws DegenerateGeometry or DimensionMismatch.
PathPlan plan_path(const Point& start, const PathSegment& segment);

/// Same as plan_path but entering at `start_speed` along the path.
PathPlan plan_path(const Point& start, const PathSegment& segment, double start_speed);

Point sample_path(const PathPlan& plan, double t);
PathState sample_path_state(const PathPlan& plan, double t);

/// Linear segments traversed without stopping at junctions.
struct LookaheadPlan {
  std::vector<int> axes;
  std::vector<PathPlan> plans;
  /// Path speed at each junction: front is the start speed (0), back is the
  /// final speed (0), entry i+1 joins plans[i] and plans[i+1].
  std::vector<double> junction_speeds;
  std::vector<double> plan_starts;
  double total_duration = 0.0;
};

/// Speed allowed through a corner between unit directions `dir_in` and
/// `dir_out`: sqrt(a*tol*(1+cos)/(1-cos)), capped at `cruise`.
double junction_speed_limit(const Point& dir_in, const Point& dir_out, double accel,
                            double corner_tolerance, double cruise);

/// Distance by which a corner of turn angle `turn_angle` (radians, 0 for
/// straight) is cut when taken at `speed` with centripetal acceleration
/// `accel`: the sagitta-like offset of the blend circle of radius v^2/a.
double corner_deviation(double speed, double accel, double turn_angle);

LookaheadPlan plan_lookahead(const Point& start, const std::vector<PathSegment>& segments,
                             const profiles::ProfileSpec& limits,
                             double corner_tolerance = kDefaultCornerTolerance);

PathState sample_lookahead(const LookaheadPlan& plan, double t);

}  // namespace mocsim::interp
