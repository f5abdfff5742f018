#include <cmath>
#include <random>

#include "doctest.h"
#include "mocsim/error.hpp"
#include "mocsim/profiles.hpp"

using namespace mocsim;
using namespace mocsim::profiles;

namespace {

// Forward Euler over the sampled velocity; independent of the closed-form
// position polynomial.
double integrate_velocity(const ProfilePlan& plan, double dt) {
  double x = plan.start_pos;
  const auto steps = static_cast<long>(std::ceil(plan.total_duration / dt));
  for (long i = 0; i < steps; ++i) {
    const double t0 = static_cast<double>(i) * dt;
    const double h = std::min(dt, plan.total_duration - t0);
    // midpoint rule keeps the 1us integration error far below 1e-4
    x += sample_profile(plan, t0 + h / 2.0).velocity * h;
  }
  return x;
}

// Textbook trapezoid velocity for the 0 -> 100, v=a=d=10 move.
double reference_trapezoid_position(double t) {
  if (t <= 1.0) return 5.0 * t * t;
  if (t <= 10.0) return 5.0 + 10.0 * (t - 1.0);
  if (t <= 11.0) {
    const double r = 11.0 - t;
    return 100.0 - 5.0 * r * r;
  }
  return 100.0;
}

}  // namespace

TEST_CASE("trapezoid with cruise phase") {
  const auto spec = make_spec(ProfileType::Trapezoidal, 10, 10);
  const auto plan = plan_profile(0, 100, spec);
  CHECK(plan.segments.size() == 3);
  CHECK(profile_duration(plan) == doctest::Approx(11.0).epsilon(1e-12));
  CHECK(plan.total_duration == doctest::Approx(11.0).epsilon(1e-12));
  CHECK(integrate_velocity(plan, 1e-6) == doctest::Approx(100.0).epsilon(1e-6));

  const auto mid = sample_profile(plan, 5.5);
  CHECK(mid.position == doctest::Approx(50.0).epsilon(1e-12));
  CHECK(mid.velocity == doctest::Approx(10.0).epsilon(1e-12));

  for (int ms = 0; ms <= 11000; ms += 7) {
    const double t = ms / 1000.0;
    CHECK(std::abs(sample_profile(plan, t).position - reference_trapezoid_position(t)) < 1e-4);
  }
}

TEST_CASE("triangular plan when cruise is unreachable") {
  const auto plan = plan_profile(0, 4, make_spec(ProfileType::Trapezoidal, 10, 1));
  CHECK(plan.total_duration == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(profile_duration(plan) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(sample_profile(plan, 2.0).velocity == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(integrate_velocity(plan, 1e-6) == doctest::Approx(4.0).epsilon(1e-6));
}

TEST_CASE("zero distance gives an empty plan") {
  for (auto type : {ProfileType::Trapezoidal, ProfileType::SCurve, ProfileType::JerkRatio}) {
    const auto plan = plan_profile(0, 0, make_spec(type, 5, 2, 0, 0.5));
    CHECK(plan.segments.empty());
    CHECK(profile_duration(plan) == 0.0);
    const auto s = sample_profile(plan, 0.0);
    CHECK(s.position == 0.0);
    CHECK(s.velocity == 0.0);
  }
}

TEST_CASE("sampling at the ends") {
  const auto plan = plan_profile(3, -7, make_spec(ProfileType::SCurve, 4, 8));
  const auto first = sample_profile(plan, 0.0);
  CHECK(first.position == 3.0);
  CHECK(first.velocity == 0.0);
  CHECK(first.acceleration == plan.segments.front().start_acc);
  const auto past = sample_profile(plan, plan.total_duration + 1.0);
  CHECK(past.position == -7.0);
  CHECK(past.velocity == 0.0);
  CHECK(past.acceleration == 0.0);
}

TEST_CASE("jerk ratio 0 reproduces the trapezoid segment for segment") {
  const auto trap = plan_profile(-2, 37, make_spec(ProfileType::Trapezoidal, 9, 4, 6));
  const auto jr = plan_profile(-2, 37, make_spec(ProfileType::JerkRatio, 9, 4, 6, 0.0));
  REQUIRE(trap.segments.size() == jr.segments.size());
  for (std::size_t i = 0; i < trap.segments.size(); ++i) {
    CHECK(std::abs(trap.segments[i].duration - jr.segments[i].duration) <= 1e-12);
    CHECK(std::abs(trap.segments[i].start_vel - jr.segments[i].start_vel) <= 1e-12);
    CHECK(std::abs(trap.segments[i].start_acc - jr.segments[i].start_acc) <= 1e-12);
    CHECK(std::abs(trap.segments[i].jerk - jr.segments[i].jerk) <= 1e-12);
  }
}

TEST_CASE("s-curve keeps acceleration continuous") {
  const auto plan = plan_profile(0, 90, make_spec(ProfileType::JerkRatio, 1000, 11000, 0, 0.5));
  CHECK(plan.segments.size() == 7);
  for (std::size_t i = 1; i < plan.segments.size(); ++i) {
    const auto& prev = plan.segments[i - 1];
    const double t = prev.duration;
    const double acc_end = prev.start_acc + prev.jerk * t;
    CHECK(std::abs(acc_end - plan.segments[i].start_acc) <= 1e-6);
  }
}

TEST_CASE("end velocity is honoured as the terminal speed") {
  const auto plan = plan_profile(0, 50, make_spec(ProfileType::Trapezoidal, 10, 5, 5, 0, 4));
  CHECK(plan.end_velocity == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(sample_profile(plan, plan.total_duration).velocity == doctest::Approx(4.0).epsilon(1e-12));
  CHECK(sample_profile(plan, plan.total_duration + 1).velocity == doctest::Approx(4.0));
}

TEST_CASE("invalid specs are rejected") {
  CHECK_THROWS_AS(plan_profile(0, 1, make_spec(ProfileType::Trapezoidal, 0, 1)), Error);
  CHECK_THROWS_AS(plan_profile(0, 1, make_spec(ProfileType::Trapezoidal, 1, -1)), Error);
  CHECK_THROWS_AS(plan_profile(0, 1, make_spec(ProfileType::JerkRatio, 1, 1, 1, 1.5)), Error);
  CHECK_THROWS_AS(plan_profile(0, 1, make_spec(ProfileType::Trapezoidal, 1, 1, 1, 0, 2)), Error);
  try {
    plan_profile(0, 1, make_spec(ProfileType::JerkRatio, 1, 1, 1, -0.1));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidSpec);
  }
}

TEST_CASE("randomized endpoint, limit, continuity and monotonicity properties") {
  std::mt19937_64 rng(20240611);
  std::uniform_real_distribution<double> pos(-500.0, 500.0);
  std::uniform_real_distribution<double> lim(0.5, 2000.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int i = 0; i < 300; ++i) {
    const auto type = static_cast<ProfileType>(i % 3);
    const double start = pos(rng), target = pos(rng);
    const auto spec = make_spec(type, lim(rng), lim(rng), lim(rng), unit(rng));
    const auto plan = plan_profile(start, target, spec);
    const double scale = std::max(1.0, std::abs(target - start));
    CHECK(std::abs(sample_profile(plan, plan.total_duration).position - target) <= 1e-9 * scale);
    const auto& last = plan.segments.back();
    const double t = last.duration;
    const double end = last.start_pos + last.start_vel * t + last.start_acc * t * t / 2 + last.jerk * t * t * t / 6;
    CHECK(std::abs(end - target) <= 1e-9 * scale);

    const double dir = target >= start ? 1.0 : -1.0;
    double prev = start;
    const double amax = std::max(spec.acceleration, spec.deceleration);
    for (double tt = 0.0; tt <= plan.total_duration + 1e-3; tt += 1e-3) {
      const auto s = sample_profile(plan, tt);
      CHECK(std::abs(s.velocity) <= spec.velocity + 1e-6);
      CHECK(std::abs(s.acceleration) <= amax + 1e-6);
      CHECK(dir * (s.position - prev) >= -1e-9 * scale);
      prev = s.position;
    }
    for (std::size_t k = 1; k < plan.segments.size(); ++k) {
      const auto& p = plan.segments[k - 1];
      const double d = p.duration;
      const double v_end = p.start_vel + p.start_acc * d + p.jerk * d * d / 2;
      CHECK(std::abs(v_end - plan.segments[k].start_vel) <= 1e-9);
    }
  }
}
