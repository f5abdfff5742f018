#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>

#include "doctest.h"
#include "mocsim/error.hpp"
#include "mocsim/harness.hpp"

using namespace mocsim;
using namespace mocsim::harness;
using mcscript::DiagnosticCategory;

namespace {

const std::filesystem::path kDataset = std::filesystem::path(MOCSIM_DATA_DIR) / "dataset" / "desk.jsonl";

const std::vector<TaskRecord>& desk() {
  static const auto tasks = load_dataset(kDataset);
  return tasks;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("no error thrown");
  return ErrorCode::InvalidArgument;
}

std::string message_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

// Replays canonical code except for the listed tasks, which always get `bad`.
class PatchedReplay final : public pipeline::Generator {
 public:
  PatchedReplay(const std::vector<TaskRecord>& tasks, std::map<std::string, std::string> bad)
      : replay_(canonical_replay(tasks)), bad_(std::move(bad)) {}
  std::string name() const override { return "patched"; }
  std::string generate(const pipeline::GenerationRequest& r) const override {
    if (auto it = bad_.find(r.task_id); it != bad_.end()) return it->second;
    return replay_.generate(r);
  }

 private:
  pipeline::ReplayGenerator replay_;
  std::map<std::string, std::string> bad_;
};

pipeline::GenerationAttempt attempt_for(const std::string& code) {
  pipeline::ReplayGenerator g;
  g.add("t", code);
  auto cfg = default_eval_config();
  cfg.loop.max_retries = 0;
  return pipeline::self_correct_loop({"t", "x"}, g, nullptr, cfg.loop).history.at(0);
}

verify::EvalOutcome outcome(const std::string& id, int difficulty, bool pass) {
  verify::EvalOutcome o;
  o.task_id = id;
  o.difficulty = difficulty;
  o.first_attempt_passed = {pass, pass};
  o.final_passed = {true, true};
  o.attempts = pass ? 1 : 2;
  if (!pass) o.error_category = DiagnosticCategory::Argument;
  return o;
}

}  // namespace

TEST_CASE("load_dataset") {
  const auto& tasks = desk();
  REQUIRE(tasks.size() == 30);
  int mix[4] = {};
  for (const auto& t : tasks) ++mix[t.difficulty];
  CHECK(mix[1] == 14);
  CHECK(mix[2] == 9);
  CHECK(mix[3] == 7);

  const std::string ok = R"({"task_id":"a","instruction":"i","canonical_code":"Sleep ms=5","difficulty":1})";
  CHECK(parse_dataset(ok + "\n\n").size() == 1);

  const std::string missing = R"({"task_id":"b","instruction":"i","canonical_code":"Sleep ms=5"})";
  CHECK(code_of([&] { parse_dataset(ok + "\n" + missing); }) == ErrorCode::SchemaError);
  CHECK(message_of([&] { parse_dataset(ok + "\n" + missing); }).find("line 2") != std::string::npos);
  CHECK(message_of([&] { parse_dataset(ok + "\n" + missing); }).find("difficulty") != std::string::npos);
  CHECK(code_of([&] { parse_dataset("{not json"); }) == ErrorCode::SchemaError);
  CHECK(code_of([&] { parse_dataset(ok + "\n" + ok); }) == ErrorCode::SchemaError);

  const std::string typo = R"({"task_id":"t7","instruction":"i","canonical_code":"StratPos axis=1 target=2 vel=1 acc=1","difficulty":2})";
  const std::string stuck = R"({"task_id":"t9","instruction":"i","canonical_code":"StartPos axis=1 target=1e9 vel=1 acc=1\nWait axis=1","difficulty":3})";
  CHECK(code_of([&] { parse_dataset(ok + "\n" + typo + "\n" + stuck); }) == ErrorCode::CanonicalCodeBroken);
  const auto msg = message_of([&] { parse_dataset(ok + "\n" + typo + "\n" + stuck); });
  CHECK(msg.find("t7") != std::string::npos);
  CHECK(msg.find("t9") != std::string::npos);
  CHECK(msg.find(": a") == std::string::npos);

  CHECK(code_of([] { load_dataset("/nonexistent/set.jsonl"); }) == ErrorCode::IoFailure);
}

TEST_CASE("required metric") {
  CHECK(required_method("StartPos axis=0 target=1 vel=1 acc=1") == verify::Method::EndPoints);
  CHECK(required_method("StartCircular axes=[0,1] center=[1,0] angle=90 vel=1 acc=1") == verify::Method::DTW);
  CHECK(required_method("SetEvent id=1 type=InputEdge bit=0\nOnEvent id=1 action=StartLinear axes=[0,1] target=[1,1] "
                        "vel=1 acc=1") == verify::Method::DTW);
  CHECK(required_method("SetEvent id=1 type=InputEdge bit=0\nOnEvent id=1 action=SetOut bit=1 level=1") ==
        verify::Method::EndPoints);
  int dtw = 0;
  for (const auto& t : desk()) dtw += required_method(t.canonical_code) == verify::Method::DTW;
  CHECK(dtw >= 8);
  CHECK(dtw <= 22);
}

TEST_CASE("classify_error") {
  CHECK(classify_error(attempt_for("StratPos axis=1 target=2 vel=1 acc=1\nWait axis=1")) == DiagnosticCategory::Api);
  CHECK(classify_error(attempt_for("StartPos axis=1 target=2 vel=1 acc=1 profile=s curve\nWait axis=1")) ==
        DiagnosticCategory::Argument);
  CHECK(classify_error(attempt_for("StartLinear axes=[0,1 target=[1,1] vel=1 acc=1")) == DiagnosticCategory::Syntax);
  const auto busy = attempt_for("StartPos axis=1 target=20 vel=1 acc=1\nStartPos axis=1 target=3 vel=1 acc=1");
  CHECK(busy.failure == pipeline::FailureStage::Runtime);
  CHECK(classify_error(busy) == DiagnosticCategory::Argument);
  CHECK_FALSE(classify_error(attempt_for("Sleep ms=3")).has_value());

  const std::string base = "StartPos axis=1 target=2 vel=10 acc=100 profile=SCurve\nWait axis=1\n";
  CHECK(classify_error(attempt_for(inject_fault(base, FaultKind::Api))) == DiagnosticCategory::Api);
  CHECK(inject_fault(base, FaultKind::Api).rfind("StratPos", 0) == 0);
  CHECK(classify_error(attempt_for(inject_fault(base, FaultKind::Argument))) == DiagnosticCategory::Argument);
  CHECK(classify_error(attempt_for(inject_fault(base, FaultKind::Syntax))) == DiagnosticCategory::Syntax);
  for (const auto& t : desk())
    for (auto kind : {FaultKind::Api, FaultKind::Argument, FaultKind::Syntax})
      CHECK_FALSE(attempt_for(inject_fault(t.canonical_code, kind)).success());
}

TEST_CASE("run_task") {
  const auto& tasks = desk();
  const auto cfg = default_eval_config();
  const auto replay = canonical_replay(tasks);

  auto o = run_task(tasks[0], replay, cfg);
  CHECK(o.first_attempt_passed.endpoints);
  CHECK(o.first_attempt_passed.dtw);
  CHECK(o.attempts == 1);
  CHECK_FALSE(o.error_category.has_value());

  // profile typo first, canonical afterwards.
  pipeline::ReplayGenerator typo;
  typo.add(tasks[1].task_id, inject_fault(tasks[1].canonical_code, FaultKind::Argument));
  typo.add(tasks[1].task_id, tasks[1].canonical_code);
  o = run_task(tasks[1], typo, cfg);
  CHECK_FALSE(o.first_attempt_passed.endpoints);
  CHECK(o.final_passed.endpoints);
  CHECK(o.attempts == 2);
  CHECK(o.error_category == DiagnosticCategory::Argument);
  CHECK(o.error_message.find("Did you mean: SCurve?") != std::string::npos);

  // Wrong target: the reported delta is the difference of the two final positions.
  REQUIRE(tasks[0].canonical_code.find("target=130.2") != std::string::npos);
  std::string wrong = tasks[0].canonical_code;
  wrong.replace(wrong.find("130.2"), 5, "130.0");
  pipeline::ReplayGenerator miss;
  miss.add(tasks[0].task_id, wrong);
  o = run_task(tasks[0], miss, cfg);
  CHECK_FALSE(o.first_attempt_passed.endpoints);
  CHECK(o.attempts == 1);
  const double a = run_script(tasks[0].canonical_code, cfg.loop.run).final_state.axes[1].position;
  const double b = run_script(wrong, cfg.loop.run).final_state.axes[1].position;
  const auto d = std::find_if(o.endpoint_deltas.begin(), o.endpoint_deltas.end(), [](auto& x) { return x.axis == 1; });
  REQUIRE(d != o.endpoint_deltas.end());
  CHECK(d->delta == doctest::Approx(std::abs(a - b)).epsilon(1e-12));
  CHECK(d->delta == doctest::Approx(0.2).epsilon(1e-9));
  CHECK_FALSE(d->within);
}

TEST_CASE("run_eval") {
  const auto& tasks = desk();
  auto cfg = default_eval_config();
  const auto replay = canonical_replay(tasks);
  const auto all = run_eval(tasks, replay, cfg);
  for (auto row : {Row::EndPoints, Row::DTW, Row::Required})
    for (auto col : {Column::Overall, Column::L1, Column::L2, Column::L3}) {
      CHECK(all.cell(row, col).ftpr == 100.0);
      CHECK(all.cell(row, col, true).ftpr == 100.0);
    }

  std::map<std::string, std::string> bad;
  for (const auto& t : tasks)
    if (t.difficulty == 3) bad[t.task_id] = "StratPos axis=1 target=1 vel=1 acc=1";
  REQUIRE(bad.size() == 7);
  const PatchedReplay l3_broken(tasks, bad);
  const auto r = run_eval(tasks, l3_broken, cfg);
  CHECK(r.cell(Row::EndPoints, Column::Overall).ftpr == 76.67);
  CHECK(r.cell(Row::DTW, Column::Overall).ftpr == 76.67);
  CHECK(r.cell(Row::EndPoints, Column::L3).ftpr == 0.0);
  CHECK(r.cell(Row::EndPoints, Column::L1).ftpr == 100.0);
  CHECK(r.error_histogram.at(DiagnosticCategory::Api) == 7);
  for (const auto& o : r.outcomes)
    if (o.difficulty == 3) CHECK(o.attempts == 4);

  // Report consistency: every cell recomputes from its own counts, and the
  // overall column sums the difficulty columns.
  for (const auto* rep : {&all, &r})
    for (const auto* table : {&rep->first_attempt, &rep->after_correction})
      for (const auto& row : *table) {
        CHECK(row[0].total == row[1].total + row[2].total + row[3].total);
        CHECK(row[0].passed == row[1].passed + row[2].passed + row[3].passed);
        for (const auto& c : row) CHECK(c.ftpr == verify::ftpr(c.passed, c.total));
      }

  // Parallel runs and shuffled order give the same report.
  auto shuffled = tasks;
  std::shuffle(shuffled.begin(), shuffled.end(), std::mt19937(4));
  cfg.jobs = 3;
  CHECK(to_json(run_eval(shuffled, l3_broken, cfg)).dump() == to_json(r).dump());

  // Self-correction only changes the corrected columns.
  const FaultInjectingGenerator faults(replay, {tasks[0].task_id, tasks[20].task_id, tasks[29].task_id});
  cfg.loop.max_retries = 0;
  const auto off = run_eval(tasks, faults, cfg);
  cfg.loop.max_retries = 3;
  const auto on = run_eval(tasks, faults, cfg);
  CHECK(to_json(off)["first_attempt"] == to_json(on)["first_attempt"]);
  CHECK(off.cell(Row::EndPoints, Column::Overall, true).passed == 27);
  CHECK(on.cell(Row::EndPoints, Column::Overall, true).passed == 30);
  CHECK(on.error_histogram.at(DiagnosticCategory::Api) == 1);
  CHECK(on.error_histogram.at(DiagnosticCategory::Argument) == 1);
  CHECK(on.error_histogram.at(DiagnosticCategory::Syntax) == 1);

  CHECK(code_of([&] { run_eval({}, replay, cfg); }) == ErrorCode::EmptyDataset);

  const auto path = std::filesystem::temp_directory_path() / "mocsim_report_test.json";
  write_report(on, path);
  auto txt = path;
  txt.replace_extension(".txt");
  CHECK(std::filesystem::exists(path));
  CHECK(std::filesystem::exists(txt));
  std::ifstream f(path);
  CHECK(nlohmann::json::parse(f)["tasks"] == 30);
  std::filesystem::remove(path);
  std::filesystem::remove(txt);
  CHECK(format_table(on).find("FTPR (MatchEndPoints)") != std::string::npos);
}

TEST_CASE("summarize fixtures") {
  std::vector<verify::EvalOutcome> outs;
  // gpt-4o counts per difficulty: 68/84, 45/56, 41/46.
  const int passed[] = {68, 45, 41}, total[] = {84, 56, 46};
  for (int level = 1; level <= 3; ++level)
    for (int i = 0; i < total[level - 1]; ++i)
      outs.push_back(outcome("L" + std::to_string(level) + "-" + std::to_string(1000 + i), level, i < passed[level - 1]));
  const auto r = summarize(outs);
  CHECK(r.cell(Row::EndPoints, Column::Overall).ftpr == 82.80);
  CHECK(r.cell(Row::EndPoints, Column::L1).ftpr == 80.95);
  CHECK(r.cell(Row::EndPoints, Column::L2).ftpr == 80.36);
  CHECK(r.cell(Row::EndPoints, Column::L3).ftpr == 89.13);
  CHECK(r.cell(Row::EndPoints, Column::Overall, true).ftpr == 100.0);
  CHECK(r.error_histogram.at(DiagnosticCategory::Argument) == 186 - 154);

  auto bad = outs;
  bad[0].difficulty = 4;
  CHECK(code_of([&] { summarize(bad); }) == ErrorCode::InvalidArgument);
  CHECK_FALSE(summarize({}).cell(Row::DTW, Column::L2).ftpr.has_value());
}

TEST_CASE("template generator on the desk dataset") {
  const auto& tasks = desk();
  const pipeline::TemplateGenerator tmpl;
  const auto r = run_eval(tasks, tmpl, default_eval_config());
  // Point-to-point tasks are within reach of the templates; desk-01 must
  // pass on its own.
  CHECK(r.outcomes[0].first_attempt_passed.endpoints);
  CHECK(r.cell(Row::EndPoints, Column::Overall).passed >= 8);
}
