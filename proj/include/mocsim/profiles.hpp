#pragma once

#include <vector>

namespace mocsim::profiles {

enum class ProfileType { Trapezoidal, SCurve, JerkRatio };

/// Kinematic limits for a single move. Deceleration of 0 is not valid here;
/// callers that allow it to be omitted substitute the acceleration first.
struct ProfileSpec {
  ProfileType type = ProfileType::Trapezoidal;
  double velocity = 0.0;
  double acceleration = 0.0;
  double deceleration = 0.0;
  double jerk_acc_ratio = 0.0;
  double end_velocity = 0.0;
};

/// Convenience constructor mirroring how scripts specify a move: deceleration
/// defaults to the acceleration.
ProfileSpec make_spec(ProfileType type, double velocity, double acceleration,
                      double deceleration = 0.0, double jerk_acc_ratio = 0.0,
                      double end_velocity = 0.0);

/// Throws Error(InvalidSpec) when the limits are unusable.
void validate(const ProfileSpec& spec);

/// Fraction of each acceleration phase spent ramping jerk: 0 for
/// Trapezoidal, 1 for SCurve, the configured ratio for JerkRatio.
double effective_jerk_ratio(const ProfileSpec& spec);

/// One cubic piece: position is start_pos + start_vel*t + start_acc*t^2/2 +
/// jerk*t^3/6 for t in [0, duration].
struct Segment {
  double duration = 0.0;
  double start_pos = 0.0;
  double start_vel = 0.0;
  double start_acc = 0.0;
  double jerk = 0.0;

  bool operator==(const Segment&) const = default;
};

struct ProfilePlan {
  double start_pos = 0.0;
  double target_pos = 0.0;
  double start_velocity = 0.0;  // signed
  double end_velocity = 0.0;    // signed, reached at total_duration
  std::vector<Segment> segments;
  std::vector<double> segment_starts;  // cumulative start time of each segment
  double total_duration = 0.0;
};

struct Sample {
  double position = 0.0;
  double velocity = 0.0;
  double acceleration = 0.0;
};

/// Point-to-point plan from rest. The plan arrives at `target` exactly; when
/// the distance is too short for a cruise phase the plan is triangular.
ProfilePlan plan_profile(double start, double target, const ProfileSpec& spec);

/// Same as above but entering the move at `start_speed` (non-negative, in the
/// direction of travel). Used by the path planners to chain segments.
/// Throws InvalidSpec if the move cannot decelerate from `start_speed` to the
/// requested end velocity within the distance.
ProfilePlan plan_profile(double start, double target, const ProfileSpec& spec,
                         double start_speed);

/// Clamps: t >= total_duration yields (target, end_velocity, 0).
Sample sample_profile(const ProfilePlan& plan, double t);

double profile_duration(const ProfilePlan& plan);

}  // namespace mocsim::profiles
