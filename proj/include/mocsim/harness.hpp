#pragma once

#include <array>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "mocsim/interpreter.hpp"
#include "mocsim/pipeline.hpp"
#include "mocsim/verify.hpp"

namespace mocsim::harness {

struct TaskRecord {
  std::string task_id;
  std::string instruction;
  std::string canonical_code;  // motion body; the device wrapper is added by preprocess
  int difficulty = 1;          // 1..3
};

/// Device every dataset program runs on: axes 0..15, 16 inputs, 16 outputs.
mcscript::RunOptions default_run_options();

/// Parses, preprocesses, validates and runs a program. Parse or validation
/// failures throw InvalidArgument with the formatted diagnostics.
engine::RunResult run_script(std::string_view code, const mcscript::RunOptions& run);

/// DTW for programs that interpolate (linear, circular, helical, spline,
/// look-ahead, or an event that starts one), EndPoints otherwise.
verify::Method required_method(std::string_view code);

/// JSONL, one task per line; blank lines are skipped. Every canonical program
/// must run to success. Throws IoFailure, SchemaError (naming the line) or
/// CanonicalCodeBroken (listing task ids).
std::vector<TaskRecord> parse_dataset(std::string_view text, const mcscript::RunOptions& run = default_run_options());
std::vector<TaskRecord> load_dataset(const std::filesystem::path& path,
                                     const mcscript::RunOptions& run = default_run_options());

/// Replay fixtures that return each task's canonical code.
pipeline::ReplayGenerator canonical_replay(const std::vector<TaskRecord>& tasks);

enum class FaultKind { Api, Argument, Syntax };

/// Breaks a program in a way the given diagnostic category reports: a
/// misspelled command, an invalid profile name, or an unterminated list.
std::string inject_fault(std::string_view code, FaultKind kind);

/// Wraps another generator and breaks attempt 1 of the designated tasks.
/// Faults rotate Api, Argument, Syntax in task id order.
class FaultInjectingGenerator final : public pipeline::Generator {
 public:
  FaultInjectingGenerator(const pipeline::Generator& base, std::set<std::string> faulty);
  std::string name() const override { return "fault-injecting(" + base_.name() + ")"; }
  std::string generate(const pipeline::GenerationRequest& request) const override;

 private:
  const pipeline::Generator& base_;
  std::map<std::string, FaultKind> faults_;
};

/// Error category of a failed attempt; empty for successful attempts and for
/// generator failures, which are not code errors.
std::optional<mcscript::DiagnosticCategory> classify_error(const pipeline::GenerationAttempt& attempt);

struct EvalConfig {
  pipeline::LoopConfig loop;  // loop.run is also used for canonical runs
  const pipeline::Index* index = nullptr;
  double endpoint_tolerance = verify::kDefaultEndpointTolerance;
  double dtw_tolerance = verify::kDefaultDtwTolerance;
  int jobs = 1;
};

/// EvalConfig with the dataset device and default loop settings.
EvalConfig default_eval_config();

verify::EvalOutcome run_task(const TaskRecord& task, const pipeline::Generator& generator, const EvalConfig& cfg);

struct Cell {
  std::size_t passed = 0;
  std::size_t total = 0;
  std::optional<double> ftpr;  // empty when total is 0
};

enum class Column { Overall, L1, L2, L3 };
/// Rows: EndPoints, DTW, and each task's required method.
enum class Row { EndPoints, DTW, Required };

using Table = std::array<std::array<Cell, 4>, 3>;  // [Row][Column]

struct EvalReport {
  std::string generator;
  int max_retries = 0;
  Table first_attempt;
  Table after_correction;
  std::vector<verify::EvalOutcome> outcomes;  // sorted by task id
  std::map<mcscript::DiagnosticCategory, std::size_t> error_histogram;  // failed first attempts only

  const Cell& cell(Row r, Column c, bool corrected = false) const {
    return (corrected ? after_correction : first_attempt)[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)];
  }
};

/// Deterministic reduction of outcomes in any order.
EvalReport summarize(std::vector<verify::EvalOutcome> outcomes, std::string generator = {}, int max_retries = 0);

/// Runs every task, in parallel up to cfg.jobs. Throws EmptyDataset.
EvalReport run_eval(const std::vector<TaskRecord>& tasks, const pipeline::Generator& generator, const EvalConfig& cfg);

nlohmann::json to_json(const EvalReport& report);
/// Aligned text table: methods by difficulty, first attempt and corrected.
std::string format_table(const EvalReport& report);
/// Writes the JSON report to `path` and the text table next to it (.txt).
void write_report(const EvalReport& report, const std::filesystem::path& path);

}  // namespace mocsim::harness
