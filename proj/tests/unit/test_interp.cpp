#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "mocsim/error.hpp"
#include "mocsim/interp.hpp"

using namespace mocsim;
using namespace mocsim::interp;
using profiles::make_spec;
using profiles::ProfileType;

namespace {

double norm(const Point& p) {
  double s = 0;
  for (double v : p) s += v * v;
  return std::sqrt(s);
}

double dist(const Point& a, const Point& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return std::sqrt(s);
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::InvalidArgument;
}

}  // namespace

TEST_CASE("linear path") {
  const auto plan = plan_path({0, 0}, PathSegment::linear({1, 2}, {3, 4}, make_spec(ProfileType::Trapezoidal, 5, 5)));
  CHECK(plan.total_arc_length == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(plan.speed_plan.target_pos == plan.total_arc_length);
  CHECK(sample_path(plan, 0.0) == Point{0, 0});
  const Point end = sample_path(plan, plan.duration() + 1.0);
  CHECK(end == Point{3, 4});

  // Symmetric profile: half the arc length is covered at half the duration.
  const Point half = sample_path(plan, plan.duration() / 2.0);
  CHECK(norm(half) == doctest::Approx(2.5).epsilon(1e-9));
  CHECK(std::abs(half[0] * 4.0 - half[1] * 3.0) < 1e-12);

  // Euler-integrate the sampled path velocity; it must land on the endpoint.
  Point x{0, 0};
  const double dt = 1e-5;
  for (double t = 0.0; t < plan.duration(); t += dt) {
    const auto st = sample_path_state(plan, t + dt / 2);
    for (int k = 0; k < 2; ++k) x[k] += st.velocity[k] * std::min(dt, plan.duration() - t);
  }
  CHECK(dist(x, {3, 4}) < 1e-4);
}

TEST_CASE("circular path keeps its radius") {
  const auto plan = plan_path({100, 0}, PathSegment::circular({1, 2}, {0, 0}, 90, make_spec(ProfileType::SCurve, 50, 200)));
  CHECK(plan.total_arc_length == doctest::Approx(100 * std::numbers::pi / 2));
  const Point end = plan.terminal_point();
  CHECK(std::abs(end[0]) < 1e-9);
  CHECK(std::abs(end[1] - 100) < 1e-9);
  for (double t = 0; t <= plan.duration(); t += 1e-3) {
    const Point p = sample_path(plan, t);
    CHECK(std::abs(norm(p) - 100.0) <= 1e-6 * 100.0);
  }
}

TEST_CASE("arc length parameterization has unit speed") {
  const auto plan = plan_path({2, 1}, PathSegment::circular({0, 1}, {-1, 3}, -230, make_spec(ProfileType::Trapezoidal, 5, 5)));
  const double h = 1e-6;
  for (double s = h; s < plan.total_arc_length - h; s += plan.total_arc_length / 37) {
    const Point a = plan.geometry->point(s - h), b = plan.geometry->point(s + h);
    CHECK(dist(a, b) / (2 * h) == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(norm(plan.geometry->tangent(s)) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("degenerate arcs are rejected") {
  const auto spec = make_spec(ProfileType::Trapezoidal, 1, 1);
  CHECK(code_of([&] { plan_path({100, 0}, PathSegment::circular({1, 2}, {0, 0}, 0, spec)); }) ==
        ErrorCode::DegenerateGeometry);
  CHECK(code_of([&] { plan_path({5, 5}, PathSegment::circular({1, 2}, {5, 5}, 45, spec)); }) ==
        ErrorCode::DegenerateGeometry);
  CHECK(code_of([&] { plan_path({1, 0}, PathSegment::helical({1, 2}, {0, 0}, 45, 3, spec)); }) ==
        ErrorCode::DimensionMismatch);
  CHECK(code_of([&] { plan_path({1, 0, 0}, PathSegment::linear({1, 2}, {0, 0}, spec)); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("helical path: full turn with linear pitch") {
  const auto plan = plan_path({100, 0, 0}, PathSegment::helical({1, 2, 3}, {0, 0}, 360, 10, make_spec(ProfileType::Trapezoidal, 80, 400)));
  const Point end = plan.terminal_point();
  CHECK(dist(end, {100, 0, 10}) < 1e-9);
  double max_dev = 0.0;
  double prev_theta = 0.0, unwrap = 0.0;
  for (double t = 0; t <= plan.duration(); t += 1e-3) {
    const Point p = sample_path(plan, t);
    double theta = std::atan2(p[1], p[0]);
    if (theta - prev_theta < -std::numbers::pi) unwrap += 2 * std::numbers::pi;
    prev_theta = theta;
    theta += unwrap;
    max_dev = std::max(max_dev, std::abs(p[2] - 10.0 * theta / (2 * std::numbers::pi)));
    CHECK(std::abs(std::hypot(p[0], p[1]) - 100.0) <= 1e-6 * 100.0);
  }
  CHECK(max_dev <= 1e-6);
}

TEST_CASE("spline passes through its waypoints with unit speed") {
  const std::vector<Point> wps{{10, 5}, {20, -3}, {25, 10}, {40, 12}};
  const auto plan = plan_path({0, 0}, PathSegment::spline({1, 2}, wps, make_spec(ProfileType::SCurve, 20, 100)));
  const auto* g = plan.geometry.get();
  CHECK(dist(plan.terminal_point(), wps.back()) <= 1e-6);
  CHECK(dist(sample_path(plan, plan.duration() + 1), wps.back()) <= 1e-6);

  // Every waypoint is hit somewhere along the sampled path.
  for (const auto& w : wps) {
    double best = 1e9;
    for (double s = 0; s <= plan.total_arc_length; s += 1e-4) best = std::min(best, dist(g->point(s), w));
    best = std::min(best, dist(g->point(plan.total_arc_length), w));
    CHECK(best <= 1e-3);
  }
  const double h = 1e-5;
  for (double s = h; s < plan.total_arc_length - h; s += plan.total_arc_length / 101) {
    CHECK(std::abs(dist(g->point(s - h), g->point(s + h)) / (2 * h) - 1.0) <= 1e-3);
  }
}

TEST_CASE("spline degenerate input") {
  const auto spec = make_spec(ProfileType::Trapezoidal, 1, 1);
  CHECK(code_of([&] { plan_path({0, 0}, PathSegment::spline({1, 2}, {{1, 1}}, spec)); }) == ErrorCode::DegenerateGeometry);
  CHECK(code_of([&] { plan_path({0, 0}, PathSegment::spline({1, 2}, {{1, 1}, {1, 1}, {2, 2}}, spec)); }) ==
        ErrorCode::DegenerateGeometry);
}

TEST_CASE("look-ahead junction speeds") {
  const auto limits = make_spec(ProfileType::Trapezoidal, 5, 100);
  SUBCASE("collinear segments keep cruise speed") {
    const auto plan = plan_lookahead({0, 0}, {PathSegment::linear({1, 2}, {10, 0}, limits), PathSegment::linear({1, 2}, {20, 0}, limits)}, limits, 0.01);
    REQUIRE(plan.junction_speeds.size() == 3);
    CHECK(plan.junction_speeds[1] == doctest::Approx(5.0));
    CHECK(plan.junction_speeds.back() == 0.0);
  }
  SUBCASE("right-angle corner") {
    const auto plan = plan_lookahead({0, 0}, {PathSegment::linear({1, 2}, {10, 0}, limits), PathSegment::linear({1, 2}, {10, 10}, limits)}, limits, 0.01);
    // sqrt(100 * 0.01 * (1 + 0) / (1 - 0)) = 1
    CHECK(plan.junction_speeds[1] == doctest::Approx(1.0).epsilon(1e-12));
    const double corner_time = plan.plan_starts[1];
    const auto a = sample_lookahead(plan, corner_time - 1e-6).position;
    const auto b = sample_lookahead(plan, corner_time).position;
    const double speed = dist(a, b) / 1e-6;
    CHECK(speed == doctest::Approx(1.0).epsilon(1e-3));
    CHECK(corner_deviation(speed, 100, std::numbers::pi / 2) <= 0.01);
  }
  SUBCASE("short single segment is triangular") {
    const auto plan = plan_lookahead({0, 0}, {PathSegment::linear({1, 2}, {0.1, 0}, limits)}, limits, 0.01);
    CHECK(plan.junction_speeds == std::vector<double>{0.0, 0.0});
    CHECK(plan.total_duration == doctest::Approx(2 * std::sqrt(0.1 / 100)).epsilon(1e-12));
    CHECK(plan.plans[0].speed_plan.segments.size() == 2);
  }
  SUBCASE("axis mismatch") {
    CHECK(code_of([&] { plan_lookahead({0, 0}, {PathSegment::linear({1, 2}, {1, 0}, limits), PathSegment::linear({1, 3}, {1, 1}, limits)}, limits); }) ==
          ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("look-ahead respects limits on a zigzag") {
  const auto limits = make_spec(ProfileType::JerkRatio, 20, 200, 200, 0.4);
  std::vector<PathSegment> segs;
  for (int i = 1; i <= 20; ++i) segs.push_back(PathSegment::linear({0, 1}, {2.0 * i, (i % 2) ? 1.5 : 0.0}, limits));
  const auto plan = plan_lookahead({0, 0}, segs, limits, 0.01);
  double prev_speed = 0.0;
  const double dt = 1e-3;
  for (double t = 0; t <= plan.total_duration; t += dt) {
    const auto st = sample_lookahead(plan, t);
    const double speed = norm(st.velocity);
    CHECK(speed <= limits.velocity + 1e-6);
    CHECK(std::abs(speed - prev_speed) / dt <= limits.acceleration + 1e-6);
    prev_speed = speed;
  }
  CHECK(dist(sample_lookahead(plan, plan.total_duration + 1).position, {40, 0}) < 1e-9);
}
