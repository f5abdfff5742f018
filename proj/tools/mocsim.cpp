#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "mocsim/error.hpp"
#include "mocsim/harness.hpp"
#include "mocsim/verify.hpp"

using namespace mocsim;

namespace {

constexpr int kOk = 0;
constexpr int kFailed = 1;
constexpr int kUsage = 2;

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot open " + path);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

int sim_run(const std::string& program_path, const std::string& log_path, const std::string& plots_dir) {
  const auto parsed = mcscript::parse(slurp(program_path));
  for (const auto& d : parsed.diagnostics) std::cerr << program_path << ":" << mcscript::format(d) << "\n";
  if (!parsed.ok()) return kFailed;

  auto run = harness::default_run_options();
  run.engine = {};
  const auto program = mcscript::preprocess(parsed.program, run.device);
  const auto diagnostics = mcscript::validate(program, run.device);
  for (const auto& d : diagnostics) std::cerr << program_path << ":" << mcscript::format(d) << "\n";
  if (!diagnostics.empty()) return kFailed;

  const auto result = mcscript::run_program(program, run);
  for (const auto& w : result.warnings) std::cerr << "warning: " << w << "\n";
  if (!log_path.empty()) write_csv(result.log, log_path);
  if (!plots_dir.empty() && !result.log.empty())
    for (const auto& p : verify::emit_plots(result.log, plots_dir)) std::cout << "plot " << p.string() << "\n";

  std::printf("ticks %lld, rows %zu\n", static_cast<long long>(result.final_state.time_ms), result.log.rows());
  for (const auto& a : result.final_state.axes)
    if (a.position != 0.0) std::printf("axis %d at %.6f\n", a.id, a.position);
  if (!result.success()) {
    const auto& e = *result.error;
    std::cerr << program_path << ":" << e.line << ":" << e.column << ": Runtime error (" << to_string(e.code)
              << "): " << e.message << "\n";
    return kFailed;
  }
  return kOk;
}

int verify_logs(verify::Method method, const std::string& a, const std::string& b, double tol) {
  const auto canonical = read_csv(a), candidate = read_csv(b);
  const auto report = method == verify::Method::EndPoints ? verify::match_endpoints(canonical, candidate, tol)
                                                          : verify::dtw_pass(canonical, candidate, tol);
  for (const auto& d : report.deltas) {
    if (d.missing)
      std::printf("axis %d missing\n", d.axis);
    else
      std::printf("axis %d delta %.6g %s\n", d.axis, d.delta, d.within ? "ok" : "FAIL");
  }
  if (report.dtw_distance) std::printf("dtw distance %.6g (tol %g)\n", *report.dtw_distance, tol);
  for (const auto& n : report.notes) std::printf("note: %s\n", n.c_str());
  std::printf("%s %s\n", std::string(verify::to_string(method)).c_str(), report.passed ? "PASS" : "FAIL");
  return report.passed ? kOk : kFailed;
}

int index_build(const std::string& docs, const std::string& samples, const std::string& out) {
  const auto index = pipeline::Index::build(pipeline::chunk_directories(docs, samples));
  index.save(out);
  std::printf("%zu chunks written to %s\n", index.chunks().size(), out.c_str());
  return kOk;
}

int retrieve(const std::string& index_path, const std::string& query, std::size_t k) {
  const auto index = pipeline::Index::load(index_path);
  pipeline::RetrievalConfig cfg;
  cfg.top_k = k;
  const auto hits = pipeline::retrieve(index, query, cfg);
  for (std::size_t i = 0; i < hits.size(); ++i) std::printf("%zu  %.6f  %s\n", i + 1, hits[i].score, hits[i].id.c_str());
  return kOk;
}

struct EvalArgs {
  std::string dataset;
  std::string generator = "replay";
  int max_retries = 3;
  int jobs = 1;
  std::string report;
  std::string index;
  std::string url;
  std::string model;
  std::string prompt;
};

int eval_run(const EvalArgs& args) {
  const auto tasks = harness::load_dataset(args.dataset);
  auto cfg = harness::default_eval_config();
  cfg.loop.max_retries = args.max_retries;
  cfg.jobs = args.jobs;
  std::optional<pipeline::Index> index;
  if (!args.index.empty()) {
    index = pipeline::Index::load(args.index);
    cfg.index = &*index;
  }

  std::unique_ptr<pipeline::Generator> generator;
  if (args.generator == "replay") {
    generator = std::make_unique<pipeline::ReplayGenerator>(harness::canonical_replay(tasks));
  } else if (args.generator == "template") {
    generator = std::make_unique<pipeline::TemplateGenerator>();
  } else {
    pipeline::RemoteConfig remote;
    remote.url = args.url;
    remote.model = args.model;
    if (!args.prompt.empty()) remote.prompt_template = slurp(args.prompt);
    generator = std::make_unique<pipeline::RemoteGenerator>(remote);
  }

  const auto report = harness::run_eval(tasks, *generator, cfg);
  if (!args.report.empty()) harness::write_report(report, args.report);
  std::cout << harness::format_table(report);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mocsim: soft-motion simulator, verifier and code-generation evaluator"};
  app.require_subcommand(1);

  auto* sim = app.add_subcommand("sim", "Simulate programs")->require_subcommand(1);
  auto* sim_run_cmd = sim->add_subcommand("run", "Run an MCScript program");
  std::string program, log_path, plots_dir;
  sim_run_cmd->add_option("program", program, "Program file (.mcs)")->required();
  sim_run_cmd->add_option("--log", log_path, "Write the trajectory log as CSV");
  sim_run_cmd->add_option("--plots", plots_dir, "Write SVG plots to this directory");

  auto* ver = app.add_subcommand("verify", "Compare two trajectory logs")->require_subcommand(1);
  std::string log_a, log_b;
  double tol = verify::kDefaultEndpointTolerance;
  auto* ver_ep = ver->add_subcommand("endpoints", "Compare final positions");
  auto* ver_dtw = ver->add_subcommand("dtw", "Compare whole trajectories with DTW");
  for (auto* c : {ver_ep, ver_dtw}) {
    c->add_option("canonical", log_a, "Reference log (CSV)")->required();
    c->add_option("candidate", log_b, "Log to check (CSV)")->required();
    c->add_option("--tol", tol, "Tolerance")->capture_default_str();
  }

  auto* idx = app.add_subcommand("index", "Retrieval index")->require_subcommand(1);
  auto* idx_build = idx->add_subcommand("build", "Chunk a corpus and build the index");
  std::string docs_dir, samples_dir, index_out;
  idx_build->add_option("docs", docs_dir, "Documentation directory (*.md, *.txt)")->required();
  idx_build->add_option("samples", samples_dir, "Sample program directory (*.mcs)")->required();
  idx_build->add_option("--out", index_out, "Index file")->required();

  auto* ret = app.add_subcommand("retrieve", "Query an index");
  std::string index_path, query;
  std::size_t k = 6;
  ret->add_option("index", index_path, "Index file")->required();
  ret->add_option("query", query, "Query text")->required();
  ret->add_option("--k", k, "Number of results")->capture_default_str()->check(CLI::PositiveNumber);

  auto* ev = app.add_subcommand("eval", "Evaluate a generator on a dataset")->require_subcommand(1);
  auto* ev_run = ev->add_subcommand("run", "Run the evaluation");
  EvalArgs eval;
  ev_run->add_option("dataset", eval.dataset, "Dataset (JSONL)")->required();
  ev_run->add_option("--generator", eval.generator, "replay, template or remote")
      ->check(CLI::IsMember({"replay", "template", "remote"}))
      ->capture_default_str();
  ev_run->add_option("--max-retries", eval.max_retries, "Self-correction retries")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  ev_run->add_option("--jobs", eval.jobs, "Parallel tasks")->check(CLI::PositiveNumber)->capture_default_str();
  ev_run->add_option("--report", eval.report, "JSON report path (a .txt table is written next to it)");
  ev_run->add_option("--index", eval.index, "Retrieval index for generation context");
  ev_run->add_option("--url", eval.url, "Chat-completion endpoint for the remote generator");
  ev_run->add_option("--model", eval.model, "Model name for the remote generator");
  ev_run->add_option("--prompt", eval.prompt, "Prompt template file for the remote generator");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (sim_run_cmd->parsed()) return sim_run(program, log_path, plots_dir);
    if (ver_ep->parsed()) return verify_logs(verify::Method::EndPoints, log_a, log_b, tol);
    if (ver_dtw->parsed()) return verify_logs(verify::Method::DTW, log_a, log_b, tol);
    if (idx_build->parsed()) return index_build(docs_dir, samples_dir, index_out);
    if (ret->parsed()) return retrieve(index_path, query, k);
    if (ev_run->parsed()) return eval_run(eval);
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.code()) << "): " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
