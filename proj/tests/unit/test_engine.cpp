#include <cmath>
#include <string>

#include "doctest.h"
#include "mocsim/engine.hpp"

using namespace mocsim;
using namespace mocsim::engine;
using profiles::make_spec;
using profiles::ProfileType;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an Error");
  return ErrorCode::InvalidArgument;
}

Engine running_engine(std::vector<int> axes = {1, 2, 3}, EngineOptions options = {}) {
  Engine e(DeviceConfig{std::move(axes), 16, 16}, options);
  e.start_communication();
  return e;
}

}  // namespace

TEST_CASE("create_device") {
  Engine e(DeviceConfig{{1, 2, 3}, 16, 16});
  CHECK(e.phase() == DevicePhase::Created);
  CHECK(e.time_ms() == 0);
  for (int a : {1, 2, 3}) {
    CHECK(e.position(a) == 0.0);
    CHECK(e.velocity(a) == 0.0);
  }
  CHECK(e.read_input(0) == 0);

  std::vector<int> many(129);
  for (int i = 0; i < 129; ++i) many[i] = i;
  CHECK(code_of([&] { Engine bad(DeviceConfig{many, 0, 0}); }) == ErrorCode::InvalidConfig);
  many.pop_back();
  CHECK_NOTHROW(Engine ok(DeviceConfig{many, 256, 256}));
  CHECK(code_of([&] { Engine bad(DeviceConfig{{1, 1}, 0, 0}); }) == ErrorCode::InvalidConfig);
  CHECK(code_of([&] { Engine bad(DeviceConfig{{1}, 257, 0}); }) == ErrorCode::InvalidConfig);
}

TEST_CASE("start_pos runs to its target") {
  Engine e = running_engine();
  e.start_log({1}, {}, {});
  e.start_pos(0, 1, 130.2, make_spec(ProfileType::Trapezoidal, 1060, 11000));
  CHECK(e.axis_busy(1));
  e.wait(1);
  const auto log = e.stop_log();
  CHECK(log.positions[0].back() == 130.2);
  CHECK(to_csv(log).find("130.200000") != std::string::npos);
}

TEST_CASE("start_pos errors") {
  Engine created(DeviceConfig{{1}, 0, 0});
  CHECK(code_of([&] { created.start_pos(0, 1, 5, make_spec(ProfileType::Trapezoidal, 1, 1)); }) == ErrorCode::WrongPhase);

  Engine e = running_engine();
  const auto spec = make_spec(ProfileType::Trapezoidal, 10, 10);
  e.start_pos(0, 1, 50, spec);
  CHECK(code_of([&] { e.start_pos(0, 1, 10, spec); }) == ErrorCode::AxisBusy);
  try {
    e.start_pos(0, 99, 10, spec);
    FAIL("expected UnknownAxis");
  } catch (const Error& err) {
    CHECK(err.code() == ErrorCode::UnknownAxis);
    CHECK(std::string(err.what()).find("[1, 2, 3]") != std::string::npos);
  }
  CHECK(code_of([&] { e.start_pos(0, 2, 10, make_spec(ProfileType::Trapezoidal, -1, 10)); }) == ErrorCode::InvalidSpec);
}

TEST_CASE("start_path") {
  Engine e = running_engine();
  const auto spec = make_spec(ProfileType::Trapezoidal, 200, 2000);
  e.start_pos(0, 1, 100, spec);
  e.wait(1);
  e.start_log({1, 2}, {}, {});
  e.start_path(0, interp::PathSegment::circular({1, 2}, {0, 0}, 90, spec));
  CHECK(e.axis_busy(1));
  CHECK(e.axis_busy(2));
  e.wait(2);
  const auto log = e.stop_log();
  CHECK(std::abs(log.positions[0].back()) < 1e-9);
  CHECK(std::abs(log.positions[1].back() - 100) < 1e-9);
  for (std::size_t r = 0; r < log.rows(); ++r)
    CHECK(std::abs(std::hypot(log.positions[0][r], log.positions[1][r]) - 100) < 1e-6 * 100);

  e.start_pos(0, 3, 500, spec);
  CHECK(code_of([&] { e.start_path(1, interp::PathSegment::linear({2, 3}, {1, 1}, spec)); }) == ErrorCode::AxisBusy);
  CHECK(code_of([&] { e.start_path(1, interp::PathSegment::helical({1, 2}, {0, 0}, 90, 5, spec)); }) ==
        ErrorCode::DimensionMismatch);
}

TEST_CASE("wait") {
  Engine e = running_engine({1}, EngineOptions{5000});
  CHECK(e.wait(1) == 0);
  CHECK(e.time_ms() == 0);

  Engine long_run = running_engine({1});
  long_run.start_pos(0, 1, 100, make_spec(ProfileType::Trapezoidal, 10, 10));
  CHECK(long_run.wait(1) == 11000);
  CHECK(long_run.position(1) == 100.0);
  CHECK(!long_run.axis_busy(1));

  const EventId never = e.set_event_input({EventCondition::input_edge(5, 1), std::nullopt});
  CHECK(code_of([&] { e.wait_event(never); }) == ErrorCode::Timeout);
  CHECK(code_of([&] { e.wait_event(42); }) == ErrorCode::UnknownEvent);
  CHECK(code_of([&] { e.wait(7); }) == ErrorCode::UnknownAxis);
}

TEST_CASE("DistanceToTarget fires one tick before its action") {
  Engine e = running_engine();
  const auto spec = make_spec(ProfileType::Trapezoidal, 1000, 10000);
  const EventId id = e.set_event_input({EventCondition::distance_to_target(3, 500), SetOutputAction{4, 1}});
  e.start_log({3}, {}, {4});
  e.start_pos(0, 3, 1200, spec);
  e.wait(3);
  const auto log = e.stop_log();

  // Oracle: the first sample of the stand-alone plan at or beyond 700.
  const auto plan = profiles::plan_profile(0, 1200, spec);
  std::int64_t first = -1;
  for (std::int64_t n = 1; n <= 100000; ++n)
    if (profiles::sample_profile(plan, n * 1e-3).position >= 700.0) {
      first = n;
      break;
    }
  REQUIRE(first > 0);
  for (std::size_t r = 0; r < log.rows(); ++r) {
    const bool expected_on = log.t_ms[r] >= first + 1;
    CHECK(static_cast<bool>(log.output_bits[0][r]) == expected_on);
  }
  CHECK(e.event_fired(id));
  CHECK(e.event_action_count(id) == 1);
}

TEST_CASE("event conditions") {
  Engine e = running_engine();
  const auto spec = make_spec(ProfileType::Trapezoidal, 1000, 10000);
  SUBCASE("already satisfied when armed") {
    e.start_pos(0, 1, 10, spec);
    e.wait(1);
    const EventId id = e.set_event_input({EventCondition::distance_to_target(1, 0.5), std::nullopt});
    CHECK(!e.event_fired(id));
    CHECK(e.wait_event(id) == 1);
  }
  SUBCASE("input edge") {
    const EventId id = e.set_event_input({EventCondition::input_edge(5, 1), SetOutputAction{2, 1}});
    e.sleep(20);
    CHECK(!e.event_fired(id));
    e.set_input_bit(5, 1);
    CHECK(e.wait_event(id) == 2);
    CHECK(e.read_output(2) == 1);
    e.set_input_bit(5, 0);
    e.sleep(3);
    e.set_input_bit(5, 1);
    e.sleep(3);
    CHECK(e.event_action_count(id) == 1);
  }
  SUBCASE("position reached starts another axis") {
    const EventId id = e.set_event_input({EventCondition::position_reached(1, 5), StartPosAction{1, 2, -20, spec}});
    e.start_pos(0, 1, 10, spec);
    e.wait_event(id);
    CHECK(e.axis_busy(2));
    e.wait(2);
    CHECK(e.position(2) == -20.0);
  }
  SUBCASE("unknown references") {
    CHECK(code_of([&] { e.set_event_input({EventCondition::distance_to_target(9, 1), std::nullopt}); }) == ErrorCode::UnknownAxis);
    CHECK(code_of([&] { e.set_event_input({EventCondition::input_edge(99, 1), std::nullopt}); }) == ErrorCode::UnknownBit);
  }
}

TEST_CASE("digital outputs and inputs") {
  Engine e = running_engine();
  e.start_log({}, {}, {3});
  e.sleep(10);
  CHECK(e.time_ms() == 10);
  e.set_output_bit(3, 1);
  e.sleep(5);
  const auto log = e.stop_log();
  CHECK(log.t_ms[9] == 10);
  CHECK(log.output_bits[0][9] == 0);
  CHECK(log.t_ms[10] == 11);
  CHECK(log.output_bits[0][10] == 1);
  CHECK(e.read_input(4) == 0);
  CHECK(code_of([&] { e.set_output_bit(999, 1); }) == ErrorCode::UnknownBit);
  CHECK(code_of([&] { e.read_input(999); }) == ErrorCode::UnknownBit);
}

TEST_CASE("logging") {
  Engine e = running_engine();
  CHECK(code_of([&] { e.stop_log(); }) == ErrorCode::NotLogging);
  e.start_log({1}, {0}, {0});
  CHECK(code_of([&] { e.start_log({1}, {}, {}); }) == ErrorCode::AlreadyLogging);
  e.sleep(100);
  const auto log = e.stop_log();
  REQUIRE(log.rows() == 100);
  for (std::size_t r = 0; r < log.rows(); ++r) CHECK(log.t_ms[r] == static_cast<std::int64_t>(r + 1));
  CHECK(code_of([&] { e.start_log({8}, {}, {}); }) == ErrorCode::UnknownAxis);
}

TEST_CASE("tick without activity only advances time") {
  Engine e = running_engine();
  const auto before = e.snapshot();
  e.tick();
  const auto after = e.snapshot();
  CHECK(after.time_ms == before.time_ms + 1);
  for (std::size_t i = 0; i < before.axes.size(); ++i) {
    CHECK(after.axes[i].position == before.axes[i].position);
    CHECK(after.axes[i].busy == before.axes[i].busy);
  }
  CHECK(after.outputs == before.outputs);
}

TEST_CASE("channels are independent") {
  const auto spec_a = make_spec(ProfileType::SCurve, 300, 3000);
  const auto spec_b = make_spec(ProfileType::Trapezoidal, 120, 900);
  auto run = [&](bool first, bool second) {
    Engine e = running_engine();
    e.start_log({1, 2}, {}, {});
    if (first) e.start_pos(0, 1, 250, spec_a);
    if (second) e.start_pos(1, 2, -75, spec_b);
    if (first && second) CHECK(e.snapshot().busy_channels == std::vector<int>{0, 1});
    e.sleep(1500);
    return e.stop_log();
  };
  const auto both = run(true, true);
  const auto only_a = run(true, false);
  const auto only_b = run(false, true);
  CHECK(both.positions[0] == only_a.positions[0]);
  CHECK(both.velocities[0] == only_a.velocities[0]);
  CHECK(both.positions[1] == only_b.positions[1]);
  CHECK(both.velocities[1] == only_b.velocities[1]);
}

TEST_CASE("close_device") {
  SUBCASE("clean finish") {
    Engine e = running_engine();
    e.start_log({1}, {}, {});
    e.start_pos(0, 1, 3, make_spec(ProfileType::Trapezoidal, 10, 10));
    e.wait(1);
    const auto r = e.close_device();
    CHECK(r.success());
    CHECK(r.warnings.empty());
    CHECK(r.log.rows() > 0);
    CHECK(e.phase() == DevicePhase::Closed);
  }
  SUBCASE("mid-move") {
    Engine e = running_engine();
    e.start_pos(0, 2, 300, make_spec(ProfileType::Trapezoidal, 10, 10));
    e.sleep(5);
    const auto r = e.close_device();
    CHECK(r.success());
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0] == "axis 2 still moving");
    const auto again = e.close_device();
    CHECK(again.success());
    CHECK(again.warnings == r.warnings);
  }
}

TEST_CASE("determinism and csv round trip") {
  auto run = [] {
    Engine e = running_engine();
    e.start_log({1, 2, 3}, {0}, {1});
    const auto spec = make_spec(ProfileType::JerkRatio, 400, 5000, 3000, 0.3);
    e.set_event_input({EventCondition::distance_to_target(1, 50), SetOutputAction{1, 1}});
    e.start_pos(0, 1, 123.456, spec);
    e.start_path(1, interp::PathSegment::linear({2, 3}, {-40, 17.5}, spec));
    e.wait(1);
    e.wait(2);
    return to_csv(e.stop_log());
  };
  const std::string a = run();
  CHECK(a == run());
  CHECK(a.rfind("t_ms,ax1_pos,ax1_vel,ax2_pos,ax2_vel,ax3_pos,ax3_vel,in0,out1\n", 0) == 0);
  CHECK(to_csv(parse_csv(a)) == a);
  CHECK(a.find("-0.000000") == std::string::npos);
}

TEST_CASE("csv parse errors") {
  CHECK(code_of([] { parse_csv(""); }) == ErrorCode::SchemaError);
  CHECK(code_of([] { parse_csv("t_ms,bogus\n1,2\n"); }) == ErrorCode::SchemaError);
  CHECK(code_of([] { parse_csv("t_ms,ax1_pos\n1,abc\n"); }) == ErrorCode::SchemaError);
  CHECK(code_of([] { parse_csv("t_ms,ax1_pos\n1\n"); }) == ErrorCode::SchemaError);
  const auto log = parse_csv("t_ms,ax4_pos,in2\n1,0.5,1\n2,0.75,0\n");
  CHECK(log.axes == std::vector<int>{4});
  CHECK(log.positions[0] == std::vector<double>{0.5, 0.75});
  CHECK(log.input_bits[0] == std::vector<std::uint8_t>{1, 0});
}
