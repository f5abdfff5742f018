#include "mocsim/profiles.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mocsim/error.hpp"

namespace mocsim::profiles {
namespace {

// Relative slack when checking that a requested velocity change fits the
// available distance; the look-ahead passes produce junction speeds that sit
// exactly on the feasibility boundary.
constexpr double kFeasibilitySlack = 1e-9;

Segment advance(const Segment& s) {
  const double t = s.duration;
  Segment next;
  next.start_pos = s.start_pos + s.start_vel * t + s.start_acc * t * t / 2.0 +
                   s.jerk * t * t * t / 6.0;
  next.start_vel = s.start_vel + s.start_acc * t + s.jerk * t * t / 2.0;
  next.start_acc = s.start_acc + s.jerk * t;
  return next;
}

class PlanBuilder {
 public:
  PlanBuilder(double pos, double vel) { cursor_.start_pos = pos; cursor_.start_vel = vel; }

  void push(double duration, double acc, double jerk) {
    if (duration <= 0.0) return;
    Segment s = cursor_;
    s.duration = duration;
    // Constant-acceleration pieces start at their nominal acceleration; jerk
    // pieces start at whatever the previous piece ended with.
    if (jerk == 0.0) s.start_acc = acc;
    s.jerk = jerk;
    segments_.push_back(s);
    cursor_ = advance(s);
  }

  // Velocity change of `dv` (signed) at peak acceleration `peak` (signed, same
  // sign as dv) with a fraction `ratio` of the phase spent ramping jerk.
  void velocity_change(double dv, double peak, double ratio) {
    if (dv == 0.0) return;
    const double duration = dv / (peak * (1.0 - ratio / 2.0));
    if (ratio == 0.0) {
      push(duration, peak, 0.0);
      return;
    }
    const double ramp = ratio * duration / 2.0;
    const double jerk = peak / ramp;
    cursor_.start_acc = 0.0;
    push(ramp, 0.0, jerk);
    push((1.0 - ratio) * duration, peak, 0.0);
    push(ramp, 0.0, -jerk);
  }

  std::vector<Segment> take() && { return std::move(segments_); }

 private:
  Segment cursor_;
  std::vector<Segment> segments_;
};

}  // namespace

ProfileSpec make_spec(ProfileType type, double velocity, double acceleration,
                      double deceleration, double jerk_acc_ratio, double end_velocity) {
  ProfileSpec spec;
  spec.type = type;
  spec.velocity = velocity;
  spec.acceleration = acceleration;
  spec.deceleration = deceleration > 0.0 ? deceleration : acceleration;
  spec.jerk_acc_ratio = jerk_acc_ratio;
  spec.end_velocity = end_velocity;
  return spec;
}

void validate(const ProfileSpec& spec) {
  auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidSpec, what); };
  if (!(spec.velocity > 0.0) || !std::isfinite(spec.velocity))
    fail("velocity must be positive, got " + std::to_string(spec.velocity));
  if (!(spec.acceleration > 0.0) || !std::isfinite(spec.acceleration))
    fail("acceleration must be positive, got " + std::to_string(spec.acceleration));
  if (!(spec.deceleration > 0.0) || !std::isfinite(spec.deceleration))
    fail("deceleration must be positive, got " + std::to_string(spec.deceleration));
  if (!(spec.jerk_acc_ratio >= 0.0 && spec.jerk_acc_ratio <= 1.0))
    fail("jerk_acc_ratio must lie in [0,1], got " + std::to_string(spec.jerk_acc_ratio));
  if (!(spec.end_velocity >= 0.0) || spec.end_velocity > spec.velocity)
    fail("end_velocity must lie in [0, velocity], got " + std::to_string(spec.end_velocity));
}

double effective_jerk_ratio(const ProfileSpec& spec) {
  switch (spec.type) {
    case ProfileType::Trapezoidal: return 0.0;
    case ProfileType::SCurve: return 1.0;
    case ProfileType::JerkRatio: return spec.jerk_acc_ratio;
  }
  return 0.0;
}

ProfilePlan plan_profile(double start, double target, const ProfileSpec& spec) {
  return plan_profile(start, target, spec, 0.0);
}

ProfilePlan plan_profile(double start, double target, const ProfileSpec& spec,
                         double start_speed) {
  validate(spec);
  if (!(start_speed >= 0.0) || start_speed > spec.velocity * (1.0 + kFeasibilitySlack))
    throw Error(ErrorCode::InvalidSpec, "start speed outside [0, velocity]");
  start_speed = std::min(start_speed, spec.velocity);

  ProfilePlan plan;
  plan.start_pos = start;
  plan.target_pos = target;

  const double distance = std::abs(target - start);
  if (distance == 0.0) {
    if (start_speed > 0.0)
      throw Error(ErrorCode::InvalidSpec, "cannot stop from a non-zero speed in zero distance");
    return plan;
  }
  const double dir = target > start ? 1.0 : -1.0;
  const double ratio = effective_jerk_ratio(spec);
  const double k = 1.0 - ratio / 2.0;
  const double acc = spec.acceleration * k;  // effective, for distance bookkeeping
  const double dec = spec.deceleration * k;

  const double v0 = start_speed;
  double v1 = std::min(spec.end_velocity, spec.velocity);
  // End velocity above what the distance allows is lowered to the reachable
  // value; the plan then accelerates all the way.
  if (v1 > v0) v1 = std::min(v1, std::sqrt(v0 * v0 + 2.0 * acc * distance));
  if (v1 < v0) {
    const double needed = (v0 * v0 - v1 * v1) / (2.0 * dec);
    if (needed > distance * (1.0 + kFeasibilitySlack) + 1e-12)
      throw Error(ErrorCode::InvalidSpec,
                  "distance " + std::to_string(distance) + " too short to decelerate from " +
                      std::to_string(v0) + " to " + std::to_string(v1));
  }

  const double inv = 1.0 / (2.0 * acc) + 1.0 / (2.0 * dec);
  double cruise = std::sqrt((distance + v0 * v0 / (2.0 * acc) + v1 * v1 / (2.0 * dec)) / inv);
  cruise = std::min(cruise, spec.velocity);
  cruise = std::max(cruise, std::max(v0, v1));

  const double t_acc = (cruise - v0) / acc;
  const double t_dec = (cruise - v1) / dec;
  const double d_acc = (v0 + cruise) / 2.0 * t_acc;
  const double d_dec = (cruise + v1) / 2.0 * t_dec;
  const double d_cruise = std::max(0.0, distance - d_acc - d_dec);

  PlanBuilder builder(start, dir * v0);
  builder.velocity_change(dir * (cruise - v0), dir * spec.acceleration, ratio);
  if (d_cruise > 0.0 && cruise > 0.0) builder.push(d_cruise / cruise, 0.0, 0.0);
  builder.velocity_change(dir * (v1 - cruise), -dir * spec.deceleration, ratio);

  plan.segments = std::move(builder).take();
  plan.start_velocity = dir * v0;
  plan.end_velocity = dir * v1;
  double t = 0.0;
  plan.segment_starts.reserve(plan.segments.size());
  for (const auto& s : plan.segments) {
    plan.segment_starts.push_back(t);
    t += s.duration;
  }
  plan.total_duration = t;
  return plan;
}

Sample sample_profile(const ProfilePlan& plan, double t) {
  if (plan.segments.empty() || t >= plan.total_duration)
    return {plan.target_pos, plan.end_velocity, 0.0};
  if (t <= 0.0) {
    const auto& s = plan.segments.front();
    return {s.start_pos, s.start_vel, s.start_acc};
  }
  auto it = std::upper_bound(plan.segment_starts.begin(), plan.segment_starts.end(), t);
  const auto index = static_cast<std::size_t>(std::distance(plan.segment_starts.begin(), it)) - 1;
  const Segment& s = plan.segments[index];
  const double dt = t - plan.segment_starts[index];
  return {s.start_pos + s.start_vel * dt + s.start_acc * dt * dt / 2.0 + s.jerk * dt * dt * dt / 6.0,
          s.start_vel + s.start_acc * dt + s.jerk * dt * dt / 2.0, s.start_acc + s.jerk * dt};
}

double profile_duration(const ProfilePlan& plan) {
  double total = 0.0;
  for (const auto& s : plan.segments) total += s.duration;
  return total;
}

}  // namespace mocsim::profiles
