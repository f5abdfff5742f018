#include "mocsim/interp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "geometry.hpp"
#include "mocsim/error.hpp"

namespace mocsim::interp {
namespace {

double distance(const Point& a, const Point& b) {
  double sum = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) sum += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(sum);
}

void require_dimension(std::size_t expected, std::size_t actual, const char* what) {
  if (expected != actual)
    throw Error(ErrorCode::DimensionMismatch, std::string(what) + ": expected " +
                                                  std::to_string(expected) + " coordinates, got " +
                                                  std::to_string(actual));
}

std::shared_ptr<const PathGeometry> build_geometry(const Point& start, const PathSegment& seg) {
  if (seg.axes.empty()) throw Error(ErrorCode::DimensionMismatch, "path needs at least one axis");
  require_dimension(seg.axes.size(), start.size(), "start point");
  switch (seg.kind) {
    case PathKind::Linear:
      require_dimension(seg.axes.size(), seg.target.size(), "linear target");
      return std::make_shared<detail::LinearGeometry>(start, seg.target);
    case PathKind::Circular:
    case PathKind::Helical: {
      const bool helical = seg.kind == PathKind::Helical;
      require_dimension(helical ? 3 : 2, seg.axes.size(), helical ? "helical axes" : "circular axes");
      if (!std::isfinite(seg.sweep_deg) || seg.sweep_deg == 0.0)
        throw Error(ErrorCode::DegenerateGeometry, "arc sweep angle must be non-zero");
      const double radius = std::hypot(start[0] - seg.center[0], start[1] - seg.center[1]);
      if (!(radius > 0.0))
        throw Error(ErrorCode::DegenerateGeometry, "arc start point coincides with its center");
      return std::make_shared<detail::ArcGeometry>(start, seg.center,
                                                   seg.sweep_deg * std::numbers::pi / 180.0,
                                                   helical, seg.helical_target);
    }
    case PathKind::Spline: {
      if (seg.waypoints.size() < 2)
        throw Error(ErrorCode::DegenerateGeometry, "spline needs at least 3 points including the start");
      std::vector<Point> points;
      points.reserve(seg.waypoints.size() + 1);
      points.push_back(start);
      for (const auto& w : seg.waypoints) {
        require_dimension(seg.axes.size(), w.size(), "spline waypoint");
        if (distance(points.back(), w) == 0.0)
          throw Error(ErrorCode::DegenerateGeometry, "consecutive spline points coincide");
        points.push_back(w);
      }
      return std::make_shared<detail::SplineGeometry>(std::move(points));
    }
  }
  throw Error(ErrorCode::InvalidArgument, "unknown path kind");
}

}  // namespace

PathSegment PathSegment::linear(std::vector<int> axes, Point target, profiles::ProfileSpec limits) {
  PathSegment s;
  s.kind = PathKind::Linear;
  s.axes = std::move(axes);
  s.target = std::move(target);
  s.limits = limits;
  return s;
}

PathSegment PathSegment::circular(std::vector<int> axes, std::array<double, 2> center,
                                  double sweep_deg, profiles::ProfileSpec limits) {
  PathSegment s;
  s.kind = PathKind::Circular;
  s.axes = std::move(axes);
  s.center = center;
  s.sweep_deg = sweep_deg;
  s.limits = limits;
  return s;
}

PathSegment PathSegment::helical(std::vector<int> axes, std::array<double, 2> center,
                                 double sweep_deg, double helical_target,
                                 profiles::ProfileSpec limits) {
  PathSegment s = circular(std::move(axes), center, sweep_deg, limits);
  s.kind = PathKind::Helical;
  s.helical_target = helical_target;
  return s;
}

PathSegment PathSegment::spline(std::vector<int> axes, std::vector<Point> waypoints,
                                profiles::ProfileSpec limits) {
  PathSegment s;
  s.kind = PathKind::Spline;
  s.axes = std::move(axes);
  s.waypoints = std::move(waypoints);
  s.limits = limits;
  return s;
}

PathPlan plan_path(const Point& start, const PathSegment& segment) {
  return plan_path(start, segment, 0.0);
}

PathPlan plan_path(const Point& start, const PathSegment& segment, double start_speed) {
  PathPlan plan;
  plan.axes = segment.axes;
  plan.geometry = build_geometry(start, segment);
  plan.total_arc_length = plan.geometry->length();
  plan.speed_plan = profiles::plan_profile(0.0, plan.total_arc_length, segment.limits, start_speed);
  return plan;
}

Point sample_path(const PathPlan& plan, double t) {
  const auto speed = profiles::sample_profile(plan.speed_plan, t);
  return plan.geometry->point(speed.position);
}

PathState sample_path_state(const PathPlan& plan, double t) {
  const auto speed = profiles::sample_profile(plan.speed_plan, t);
  PathState state;
  state.position = plan.geometry->point(speed.position);
  state.velocity = plan.geometry->tangent(speed.position);
  for (double& v : state.velocity) v *= speed.velocity;
  return state;
}

double junction_speed_limit(const Point& dir_in, const Point& dir_out, double accel,
                            double corner_tolerance, double cruise) {
  double cos_turn = 0.0;
  for (std::size_t i = 0; i < dir_in.size(); ++i) cos_turn += dir_in[i] * dir_out[i];
  cos_turn = std::clamp(cos_turn, -1.0, 1.0);
  if (cos_turn >= 1.0 - 1e-12) return cruise;
  if (1.0 + cos_turn <= 1e-12) return 0.0;
  const double v = std::sqrt(accel * corner_tolerance * (1.0 + cos_turn) / (1.0 - cos_turn));
  return std::min(v, cruise);
}

double corner_deviation(double speed, double accel, double turn_angle) {
  if (speed <= 0.0 || turn_angle <= 0.0) return 0.0;
  const double c = std::cos(turn_angle / 2.0);
  if (c <= 0.0) return std::numeric_limits<double>::infinity();
  return speed * speed / accel * (1.0 / c - 1.0);
}

LookaheadPlan plan_lookahead(const Point& start, const std::vector<PathSegment>& segments,
                             const profiles::ProfileSpec& limits, double corner_tolerance) {
  if (segments.empty()) throw Error(ErrorCode::InvalidArgument, "look-ahead needs at least one segment");
  if (!(corner_tolerance > 0.0))
    throw Error(ErrorCode::InvalidArgument, "corner tolerance must be positive");
  profiles::validate(limits);
  const auto& axes = segments.front().axes;
  require_dimension(axes.size(), start.size(), "look-ahead start");

  const std::size_t n = segments.size();
  std::vector<Point> corners{start};
  std::vector<double> lengths;
  std::vector<Point> directions;
  for (const auto& seg : segments) {
    if (seg.kind != PathKind::Linear)
      throw Error(ErrorCode::InvalidArgument, "look-ahead accepts linear segments only");
    if (seg.axes != axes) throw Error(ErrorCode::DimensionMismatch, "look-ahead segments must share axes");
    require_dimension(axes.size(), seg.target.size(), "look-ahead target");
    const double len = distance(corners.back(), seg.target);
    if (len == 0.0) throw Error(ErrorCode::DegenerateGeometry, "zero-length look-ahead segment");
    Point dir(axes.size());
    for (std::size_t k = 0; k < dir.size(); ++k) dir[k] = (seg.target[k] - corners.back()[k]) / len;
    lengths.push_back(len);
    directions.push_back(std::move(dir));
    corners.push_back(seg.target);
  }

  const double k = 1.0 - profiles::effective_jerk_ratio(limits) / 2.0;
  const double acc = limits.acceleration * k;
  const double dec = limits.deceleration * k;
  const double corner_accel = std::min(limits.acceleration, limits.deceleration);

  std::vector<double> v(n + 1, 0.0);
  for (std::size_t j = 1; j < n; ++j)
    v[j] = junction_speed_limit(directions[j - 1], directions[j], corner_accel, corner_tolerance,
                                limits.velocity);
  for (std::size_t i = n; i-- > 0;) v[i] = std::min(v[i], std::sqrt(v[i + 1] * v[i + 1] + 2.0 * dec * lengths[i]));
  for (std::size_t i = 0; i < n; ++i) v[i + 1] = std::min(v[i + 1], std::sqrt(v[i] * v[i] + 2.0 * acc * lengths[i]));

  LookaheadPlan plan;
  plan.axes = axes;
  plan.junction_speeds.push_back(0.0);
  double entry = 0.0;
  double t = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    profiles::ProfileSpec seg_limits = limits;
    seg_limits.end_velocity = v[i + 1];
    PathSegment seg = PathSegment::linear(axes, corners[i + 1], seg_limits);
    PathPlan p = plan_path(corners[i], seg, entry);
    entry = std::abs(p.speed_plan.end_velocity);
    plan.junction_speeds.push_back(entry);
    plan.plan_starts.push_back(t);
    t += p.duration();
    plan.plans.push_back(std::move(p));
  }
  plan.total_duration = t;
  return plan;
}

PathState sample_lookahead(const LookaheadPlan& plan, double t) {
  if (t >= plan.total_duration) return sample_path_state(plan.plans.back(), plan.plans.back().duration());
  auto it = std::upper_bound(plan.plan_starts.begin(), plan.plan_starts.end(), t);
  std::size_t index = static_cast<std::size_t>(std::distance(plan.plan_starts.begin(), it));
  index = index == 0 ? 0 : index - 1;
  return sample_path_state(plan.plans[index], t - plan.plan_starts[index]);
}

}  // namespace mocsim::interp
