#include "mocsim/error.hpp"
#include "mocsim/pipeline.hpp"

namespace mocsim::pipeline {
namespace {

std::string join(const std::vector<mcscript::Diagnostic>& diagnostics) {
  std::string out;
  for (const auto& d : diagnostics) {
    if (!out.empty()) out += "\n";
    out += mcscript::format(d);
  }
  return out;
}

std::string runtime_text(const engine::RunError& e) {
  std::string where = e.line > 0 ? std::to_string(e.line) + ":" + std::to_string(e.column) + ": " : "";
  return where + "Runtime error (" + std::string(to_string(e.code)) + "): " + e.message;
}

void check_program(GenerationAttempt& a, const LoopConfig& cfg) {
  auto parsed = mcscript::parse(a.program_text);
  if (!parsed.ok()) {
    a.failure = FailureStage::Syntax;
    a.diagnostics = std::move(parsed.diagnostics);
    a.error = join(a.diagnostics);
    return;
  }
  const auto program = mcscript::preprocess(parsed.program, cfg.run.device);
  a.diagnostics = mcscript::validate(program, cfg.run.device);
  if (!a.diagnostics.empty()) {
    a.failure = FailureStage::Validation;
    a.error = join(a.diagnostics);
    return;
  }
  a.run = mcscript::run_program(program, cfg.run);
  if (!a.run->success()) {
    a.failure = FailureStage::Runtime;
    a.error = runtime_text(*a.run->error);
  }
}

}  // namespace

LoopResult self_correct_loop(const Task& task, const Generator& generator, const Index* index, const LoopConfig& cfg) {
  if (cfg.max_retries < 0) throw Error(ErrorCode::InvalidArgument, "max_retries must be non-negative");
  const Decomposition decomposition = cfg.decomposer ? cfg.decomposer(task.instruction) : decompose(task.instruction);

  LoopResult result;
  std::optional<std::string> prior_error, prior_program;
  for (int attempt = 1; attempt <= cfg.max_retries + 1; ++attempt) {
    GenerationAttempt a;
    a.index = attempt;
    a.prior_error = prior_error;

    GenerationRequest request;
    request.task_id = task.id;
    request.instruction = task.instruction;
    request.decomposition = decomposition;
    request.prior_error = prior_error;
    request.prior_program = prior_program;
    request.attempt = attempt;
    if (index && !index->empty()) {
      const std::string query = prior_error ? task.instruction + "\n" + *prior_error : task.instruction;
      for (const auto& hit : retrieve(*index, query, cfg.retrieval)) {
        a.retrieved_ids.push_back(hit.id);
        request.chunks.push_back(index->chunks()[hit.index]);
      }
    }

    bool give_up = false;
    try {
      a.program_text = generator.generate(request);
      check_program(a, cfg);
    } catch (const Error& e) {
      a.failure = FailureStage::Generation;
      a.error = e.what();
      give_up = e.code() == ErrorCode::GeneratorUnavailable;
    }
    const bool done = a.success();
    prior_error = a.error;
    prior_program = a.program_text;
    result.history.push_back(std::move(a));
    if (done || give_up) break;
  }
  return result;
}

}  // namespace mocsim::pipeline
