#include "mocsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "mocsim/error.hpp"

namespace mocsim::harness {
namespace {

constexpr const char* kInterpolating[] = {"StartLinear", "StartCircular", "StartHelical", "StartSpline",
                                          "StartLookahead"};

bool interpolates(const mcscript::Statement& st) {
  const auto is = [](std::string_view name) {
    return std::find(std::begin(kInterpolating), std::end(kInterpolating), name) != std::end(kInterpolating);
  };
  if (is(st.command)) return true;
  if (st.command != "OnEvent") return false;
  const auto* action = st.find("action");
  return action && action->value.kind == mcscript::Value::Kind::Word && is(action->value.word);
}

std::string join_diagnostics(const std::vector<mcscript::Diagnostic>& ds) {
  std::string out;
  for (const auto& d : ds) out += (out.empty() ? "" : "\n") + mcscript::format(d);
  return out;
}

// First word of the first statement line, as [begin, end) offsets.
std::pair<std::size_t, std::size_t> first_command(std::string_view code) {
  std::size_t pos = 0;
  while (pos < code.size()) {
    const std::size_t eol = std::min(code.find('\n', pos), code.size());
    std::size_t b = pos;
    while (b < eol && (code[b] == ' ' || code[b] == '\t')) ++b;
    if (b < eol && code[b] != '#') {
      std::size_t e = b;
      while (e < eol && std::isalpha(static_cast<unsigned char>(code[e]))) ++e;
      if (e > b) return {b, e};
    }
    pos = eol + 1;
  }
  return {std::string_view::npos, std::string_view::npos};
}

struct Verdict {
  verify::MethodFlags flags;
  std::vector<verify::AxisDelta> deltas;
  std::optional<double> dtw_distance;
  std::string note;
};

Verdict judge(const TrajectoryLog& canonical, const pipeline::GenerationAttempt& attempt, const EvalConfig& cfg) {
  Verdict v;
  if (!attempt.success() || !attempt.run) return v;
  try {
    const auto ep = verify::match_endpoints(canonical, attempt.run->log, cfg.endpoint_tolerance);
    v.flags.endpoints = ep.passed;
    v.deltas = ep.deltas;
    if (!ep.passed && !ep.notes.empty()) v.note = ep.notes.front();
    const auto dtw = verify::dtw_pass(canonical, attempt.run->log, cfg.dtw_tolerance);
    v.flags.dtw = dtw.passed;
    v.dtw_distance = dtw.dtw_distance;
  } catch (const Error& e) {
    v.note = e.what();
  }
  return v;
}

std::size_t column_of(int difficulty) {
  if (difficulty < 1 || difficulty > 3)
    throw Error(ErrorCode::InvalidArgument, "difficulty must be 1, 2 or 3, got " + std::to_string(difficulty));
  return static_cast<std::size_t>(difficulty);
}

constexpr const char* kColumnNames[] = {"OVERALL", "L1", "L2", "L3"};
constexpr const char* kRowNames[] = {"EndPoints", "DTW", "Required"};

nlohmann::json table_json(const Table& t) {
  nlohmann::json out = nlohmann::json::object();
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t c = 0; c < 4; ++c) {
      const auto& cell = t[r][c];
      out[kRowNames[r]][kColumnNames[c]] = {{"passed", cell.passed},
                                            {"total", cell.total},
                                            {"ftpr", cell.ftpr ? nlohmann::json(*cell.ftpr) : nlohmann::json()}};
    }
  return out;
}

std::string fixed2(const Cell& c) {
  if (!c.ftpr) return "-";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", *c.ftpr);
  return buf;
}

}  // namespace

mcscript::RunOptions default_run_options() {
  mcscript::RunOptions run;
  for (int a = 0; a < 16; ++a) run.device.axes.push_back(a);
  run.device.input_bits = 16;
  run.device.output_bits = 16;
  run.engine.max_wait_ticks = 60'000;
  return run;
}

engine::RunResult run_script(std::string_view code, const mcscript::RunOptions& run) {
  auto parsed = mcscript::parse(code);
  if (!parsed.ok()) throw Error(ErrorCode::InvalidArgument, join_diagnostics(parsed.diagnostics));
  const auto program = mcscript::preprocess(parsed.program, run.device);
  if (const auto ds = mcscript::validate(program, run.device); !ds.empty())
    throw Error(ErrorCode::InvalidArgument, join_diagnostics(ds));
  return mcscript::run_program(program, run);
}

verify::Method required_method(std::string_view code) {
  const auto parsed = mcscript::parse(code);
  for (const auto& st : parsed.program.statements)
    if (interpolates(st)) return verify::Method::DTW;
  return verify::Method::EndPoints;
}

std::vector<TaskRecord> parse_dataset(std::string_view text, const mcscript::RunOptions& run) {
  std::vector<TaskRecord> tasks;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  for (int n = 1; std::getline(in, line); ++n) {
    if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
    const auto fail = [n](const std::string& why) {
      throw Error(ErrorCode::SchemaError, "line " + std::to_string(n) + ": " + why);
    };
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      fail(std::string("invalid JSON (") + e.what() + ")");
    }
    if (!j.is_object()) fail("expected a JSON object");
    TaskRecord t;
    for (auto [key, field] : {std::pair{"task_id", &t.task_id}, std::pair{"instruction", &t.instruction},
                              std::pair{"canonical_code", &t.canonical_code}}) {
      if (!j.contains(key) || !j[key].is_string()) fail(std::string("missing string field '") + key + "'");
      *field = j[key].get<std::string>();
    }
    if (!j.contains("difficulty") || !j["difficulty"].is_number_integer()) fail("missing integer field 'difficulty'");
    t.difficulty = j["difficulty"].get<int>();
    if (t.difficulty < 1 || t.difficulty > 3) fail("difficulty must be 1, 2 or 3");
    if (t.task_id.empty()) fail("empty task_id");
    if (!seen.insert(t.task_id).second) fail("duplicate task_id '" + t.task_id + "'");
    tasks.push_back(std::move(t));
  }

  std::vector<std::string> broken;
  for (const auto& t : tasks) {
    try {
      if (!run_script(t.canonical_code, run).success()) broken.push_back(t.task_id);
    } catch (const Error&) {
      broken.push_back(t.task_id);
    }
  }
  if (!broken.empty()) {
    std::string ids;
    for (const auto& id : broken) ids += (ids.empty() ? "" : ", ") + id;
    throw Error(ErrorCode::CanonicalCodeBroken, "canonical code does not run for: " + ids);
  }
  return tasks;
}

std::vector<TaskRecord> load_dataset(const std::filesystem::path& path, const mcscript::RunOptions& run) {
  std::ifstream file(path, std::ios::binary);
  if (!file) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  std::ostringstream buffer;
  buffer << file.rdbuf();
  return parse_dataset(buffer.str(), run);
}

pipeline::ReplayGenerator canonical_replay(const std::vector<TaskRecord>& tasks) {
  pipeline::ReplayGenerator replay;
  for (const auto& t : tasks) replay.add(t.task_id, t.canonical_code);
  return replay;
}

std::string inject_fault(std::string_view code, FaultKind kind) {
  std::string out(code);
  switch (kind) {
    case FaultKind::Api: {
      // Transpose two letters of the first command: StartPos -> StratPos.
      const auto [b, e] = first_command(out);
      if (b == std::string::npos) return out + "\nStratPos axis=0 target=1\n";
      for (std::size_t k = b + 2; k + 1 < e; ++k) {
        if (out[k] != out[k + 1]) {
          std::swap(out[k], out[k + 1]);
          return out;
        }
      }
      out.insert(e, "x");
      return out;
    }
    case FaultKind::Argument: {
      const auto at = out.find("profile=");
      if (at != std::string::npos) {
        const auto end = out.find_first_of(" \t\n#", at);
        return out.replace(at, (end == std::string::npos ? out.size() : end) - at, "profile=s curve");
      }
      const auto [b, e] = first_command(out);
      if (b == std::string::npos) return out + "\nSleep ms=1 profile=s curve\n";
      const auto eol = std::min(out.find_first_of("#\n", e), out.size());
      out.insert(eol, " profile=s curve");
      return out;
    }
    case FaultKind::Syntax:
      if (!out.empty() && out.back() != '\n') out += '\n';
      return out + "StartLog axes=[0, 1\n";
  }
  return out;
}

FaultInjectingGenerator::FaultInjectingGenerator(const pipeline::Generator& base, std::set<std::string> faulty)
    : base_(base) {
  constexpr FaultKind order[] = {FaultKind::Api, FaultKind::Argument, FaultKind::Syntax};
  std::size_t k = 0;
  for (const auto& id : faulty) faults_[id] = order[k++ % 3];
}

std::string FaultInjectingGenerator::generate(const pipeline::GenerationRequest& request) const {
  std::string code = base_.generate(request);
  const auto it = faults_.find(request.task_id);
  if (request.attempt == 1 && it != faults_.end()) return inject_fault(code, it->second);
  return code;
}

std::optional<mcscript::DiagnosticCategory> classify_error(const pipeline::GenerationAttempt& attempt) {
  using mcscript::DiagnosticCategory;
  switch (attempt.failure) {
    case pipeline::FailureStage::Syntax:
      return DiagnosticCategory::Syntax;
    case pipeline::FailureStage::Validation:
      return attempt.diagnostics.empty() ? DiagnosticCategory::Argument : attempt.diagnostics.front().category;
    case pipeline::FailureStage::Runtime:
      if (attempt.run && attempt.run->error && attempt.run->error->code == ErrorCode::UnknownCommand)
        return DiagnosticCategory::Api;
      return DiagnosticCategory::Argument;
    case pipeline::FailureStage::None:
    case pipeline::FailureStage::Generation:
      break;
  }
  return std::nullopt;
}

EvalConfig default_eval_config() {
  EvalConfig cfg;
  cfg.loop.run = default_run_options();
  return cfg;
}

verify::EvalOutcome run_task(const TaskRecord& task, const pipeline::Generator& generator, const EvalConfig& cfg) {
  verify::EvalOutcome o;
  o.task_id = task.task_id;
  o.difficulty = task.difficulty;
  o.required_method = required_method(task.canonical_code);

  engine::RunResult canonical;
  try {
    canonical = run_script(task.canonical_code, cfg.loop.run);
  } catch (const Error& e) {
    o.error_message = std::string("canonical code failed: ") + e.what();
    return o;
  }
  if (!canonical.success()) {
    o.error_message = "canonical code failed: " + canonical.error->message;
    return o;
  }

  const auto loop = pipeline::self_correct_loop({task.task_id, task.instruction}, generator, cfg.index, cfg.loop);
  o.attempts = static_cast<int>(loop.history.size());
  if (loop.history.empty()) return o;

  const auto& first = loop.history.front();
  const auto v1 = judge(canonical.log, first, cfg);
  o.first_attempt_passed = v1.flags;
  o.endpoint_deltas = v1.deltas;
  o.dtw_distance = v1.dtw_distance;
  if (!first.success()) {
    o.error_category = classify_error(first);
    o.error_message = first.error;
  } else {
    o.error_message = v1.note;
  }
  o.final_passed = loop.history.size() == 1 ? v1.flags : judge(canonical.log, loop.history.back(), cfg).flags;
  return o;
}

EvalReport summarize(std::vector<verify::EvalOutcome> outcomes, std::string generator, int max_retries) {
  EvalReport r;
  r.generator = std::move(generator);
  r.max_retries = max_retries;
  for (auto c : {mcscript::DiagnosticCategory::Api, mcscript::DiagnosticCategory::Argument,
                 mcscript::DiagnosticCategory::Syntax})
    r.error_histogram[c] = 0;
  std::sort(outcomes.begin(), outcomes.end(),
            [](const verify::EvalOutcome& a, const verify::EvalOutcome& b) { return a.task_id < b.task_id; });

  for (const auto& o : outcomes) {
    const std::size_t level = column_of(o.difficulty);
    for (auto [table, flags] : {std::pair{&r.first_attempt, &o.first_attempt_passed},
                                std::pair{&r.after_correction, &o.final_passed}}) {
      const bool pass[3] = {flags->endpoints, flags->dtw, flags->get(o.required_method)};
      for (std::size_t row = 0; row < 3; ++row)
        for (std::size_t col : {std::size_t{0}, level}) {
          auto& cell = (*table)[row][col];
          ++cell.total;
          cell.passed += pass[row] ? 1 : 0;
        }
    }
    if (o.error_category) ++r.error_histogram[*o.error_category];
  }
  for (auto* table : {&r.first_attempt, &r.after_correction})
    for (auto& row : *table)
      for (auto& cell : row)
        if (cell.total > 0) cell.ftpr = verify::ftpr(cell.passed, cell.total);
  r.outcomes = std::move(outcomes);
  return r;
}

EvalReport run_eval(const std::vector<TaskRecord>& tasks, const pipeline::Generator& generator, const EvalConfig& cfg) {
  if (tasks.empty()) throw Error(ErrorCode::EmptyDataset, "dataset has no tasks");
  std::vector<verify::EvalOutcome> outcomes(tasks.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;
  auto worker = [&] {
    for (std::size_t i; (i = next++) < tasks.size();) {
      try {
        outcomes[i] = run_task(tasks[i], generator, cfg);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto jobs = static_cast<std::size_t>(std::clamp<int>(cfg.jobs, 1, static_cast<int>(tasks.size())));
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < jobs; ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return summarize(std::move(outcomes), generator.name(), cfg.loop.max_retries);
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json out;
  out["generator"] = report.generator;
  out["max_retries"] = report.max_retries;
  out["tasks"] = report.outcomes.size();
  out["first_attempt"] = table_json(report.first_attempt);
  out["after_correction"] = table_json(report.after_correction);
  for (const auto& [cat, n] : report.error_histogram) out["error_histogram"][std::string(mcscript::to_string(cat))] = n;
  out["outcomes"] = nlohmann::json::array();
  for (const auto& o : report.outcomes) {
    nlohmann::json j;
    j["task_id"] = o.task_id;
    j["difficulty"] = o.difficulty;
    j["required_method"] = verify::to_string(o.required_method);
    j["first_attempt_passed"] = {{"EndPoints", o.first_attempt_passed.endpoints}, {"DTW", o.first_attempt_passed.dtw}};
    j["final_passed"] = {{"EndPoints", o.final_passed.endpoints}, {"DTW", o.final_passed.dtw}};
    j["attempts"] = o.attempts;
    j["error_category"] = o.error_category ? nlohmann::json(mcscript::to_string(*o.error_category)) : nlohmann::json();
    j["error_message"] = o.error_message;
    j["endpoint_deltas"] = nlohmann::json::array();
    for (const auto& d : o.endpoint_deltas)
      j["endpoint_deltas"].push_back({{"axis", d.axis},
                                      {"delta", std::isfinite(d.delta) ? nlohmann::json(d.delta) : nlohmann::json()},
                                      {"missing", d.missing},
                                      {"within", d.within}});
    j["dtw_distance"] = o.dtw_distance ? nlohmann::json(*o.dtw_distance) : nlohmann::json();
    out["outcomes"].push_back(std::move(j));
  }
  return out;
}

std::string format_table(const EvalReport& report) {
  std::ostringstream out;
  out << "Generator: " << report.generator << "   Tasks: " << report.outcomes.size()
      << "   Max retries: " << report.max_retries << "\n\n";
  char buf[256];
  const char* headings[] = {"FTPR (MatchEndPoints)", "FTPR (DTW)", "FTPR (required metric)"};
  for (std::size_t row = 0; row < 3; ++row) {
    out << headings[row] << "\n";
    std::snprintf(buf, sizeof buf, "  %-18s %9s %9s %9s %9s\n", "", "OVERALL", "L1", "L2", "L3");
    out << buf;
    for (bool corrected : {false, true}) {
      const auto& t = corrected ? report.after_correction : report.first_attempt;
      std::snprintf(buf, sizeof buf, "  %-18s %9s %9s %9s %9s\n", corrected ? "after correction" : "first attempt",
                    fixed2(t[row][0]).c_str(), fixed2(t[row][1]).c_str(), fixed2(t[row][2]).c_str(),
                    fixed2(t[row][3]).c_str());
      out << buf;
    }
    std::string counts[4];
    for (std::size_t c = 0; c < 4; ++c)
      counts[c] = std::to_string(report.first_attempt[row][c].passed) + "/" +
                  std::to_string(report.first_attempt[row][c].total);
    std::snprintf(buf, sizeof buf, "  %-18s %9s %9s %9s %9s\n\n", "passed/total", counts[0].c_str(), counts[1].c_str(),
                  counts[2].c_str(), counts[3].c_str());
    out << buf;
  }
  out << "Failed first attempts by category:";
  for (const auto& [cat, n] : report.error_histogram) out << "  " << mcscript::to_string(cat) << " " << n;
  out << "\n";
  return out.str();
}

void write_report(const EvalReport& report, const std::filesystem::path& path) {
  auto text_path = path;
  text_path.replace_extension(".txt");
  if (text_path == path) text_path += ".table";
  std::ofstream json(path, std::ios::trunc);
  if (!json) throw Error(ErrorCode::IoFailure, "cannot write " + path.string());
  json << to_json(report).dump(2) << "\n";
  std::ofstream table(text_path, std::ios::trunc);
  if (!table) throw Error(ErrorCode::IoFailure, "cannot write " + text_path.string());
  table << format_table(report);
}

}  // namespace mocsim::harness
