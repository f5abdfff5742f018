#include <cctype>
#include <regex>
#include <sstream>

#include "../mcscript/text.hpp"
#include "mocsim/error.hpp"
#include "mocsim/pipeline.hpp"

namespace mocsim::pipeline {
namespace {

constexpr const char* kNumber = R"((-?\d+(?:\.\d+)?))";

std::optional<std::string> find_number(const std::string& text, const std::string& lead) {
  const std::regex re("(?:" + lead + R"()\s*(?:of|=|:|is)?\s*)" + kNumber, std::regex::icase);
  std::smatch m;
  if (std::regex_search(text, m, re)) return m[1].str();
  return std::nullopt;
}

std::optional<std::string> profile_in(const std::string& text) {
  static const std::regex jerk(R"(jerk[\s_-]*ratio\s+profile|profile\s+(?:of\s+)?jerk[\s_-]*ratio)", std::regex::icase);
  static const std::regex scurve(R"(s[\s_-]?curve)", std::regex::icase);
  static const std::regex trap(R"(trapezoid)", std::regex::icase);
  if (std::regex_search(text, jerk)) return "JerkRatio";
  if (std::regex_search(text, scurve)) return "SCurve";
  if (std::regex_search(text, trap)) return "Trapezoidal";
  return std::nullopt;
}

// Motion parameters carry over from one clause to the next, so "then move
// axis 2 to 5" reuses the speed given earlier.
struct Motion {
  std::optional<std::string> vel, acc, dec, profile, ratio, end_vel;
};

void update(Motion& m, const std::string& clause) {
  static const std::regex end_velocity(R"(end[\s_-]*velocity)", std::regex::icase);
  if (auto v = find_number(clause, R"(end[\s_-]*velocity)")) m.end_vel = v;
  const std::string rest = std::regex_replace(clause, end_velocity, "end_vel");
  if (auto v = find_number(rest, R"(\b(?:speed|velocity))")) m.vel = v;
  if (auto v = find_number(clause, R"(\bacceleration)")) m.acc = v;
  if (auto v = find_number(clause, R"(deceleration)")) m.dec = v;
  if (auto v = find_number(clause, R"(jerk[\s_-]*acc[\s_-]*ratio|jerk\s+ratio(?!\s+profile))")) m.ratio = v;
  if (auto p = profile_in(clause)) m.profile = p;
}

}  // namespace

std::string ReplayGenerator::generate(const GenerationRequest& request) const {
  const auto it = scripts_.find(request.task_id);
  if (it == scripts_.end() || it->second.empty())
    throw Error(ErrorCode::GeneratorUnavailable, "no replay fixture for task " + request.task_id);
  const auto k = static_cast<std::size_t>(std::max(request.attempt, 1)) - 1;
  return it->second[std::min(k, it->second.size() - 1)];
}

std::string TemplateGenerator::generate(const GenerationRequest& request) const {
  auto clauses = request.decomposition.subtasks;
  if (clauses.empty()) clauses = decompose(request.instruction).subtasks;

  static const std::regex move(R"(move\s+axis\s+(\d+)\s+to\s+(?:the\s+)?(?:position\s+)?)" + std::string(kNumber),
                               std::regex::icase);
  static const std::regex output(
      R"((?:set|turn)\s+(?:on\s+|off\s+)?output\s+(?:bit\s+)?(\d+)(?:\s+(?:to\s+)?(on|off|high|low|1|0))?)",
      std::regex::icase);
  static const std::regex turn_off(R"(turn\s+off|\boff\b|\blow\b|to\s+0\b)", std::regex::icase);
  static const std::regex sleep(R"((?:wait|sleep|pause)\s+(?:for\s+)?(\d+)\s*ms)", std::regex::icase);

  Motion motion;
  std::ostringstream out;
  bool emitted = false;
  for (const auto& clause : clauses) {
    update(motion, clause);
    std::smatch m;
    if (std::regex_search(clause, m, move)) {
      const std::string axis = m[1], target = m[2];
      if (!motion.vel)
        throw Error(ErrorCode::GeneratorUnavailable, "template generator found no speed for axis " + axis);
      std::string acc = motion.acc.value_or(mcscript::detail::number_text(10.0 * std::stod(*motion.vel)));
      out << "StartPos axis=" << axis << " target=" << target << " vel=" << *motion.vel << " acc=" << acc;
      if (motion.dec) out << " dec=" << *motion.dec;
      if (motion.profile) out << " profile=" << *motion.profile;
      if (motion.profile == "JerkRatio") out << " jerk_acc_ratio=" << motion.ratio.value_or("0.5");
      if (motion.end_vel) out << " end_vel=" << *motion.end_vel;
      out << "\nWait axis=" << axis << "\n";
      emitted = true;
    } else if (std::regex_search(clause, m, output)) {
      const bool off = std::regex_search(clause, turn_off);
      out << "SetOut bit=" << m[1] << " level=" << (off ? 0 : 1) << "\n";
      emitted = true;
    } else if (std::regex_search(clause, m, sleep)) {
      out << "Sleep ms=" << m[1] << "\n";
      emitted = true;
    }
  }
  if (!emitted) throw Error(ErrorCode::GeneratorUnavailable, "template generator matched no supported motion");
  return out.str();
}

std::string default_prompt_template() {
  return R"(You write MCScript programs for a soft-motion controller.
One command per line, written as `Command key=value ...`; lists use [a, b].
Reply with a single program inside a ``` fenced block and nothing else.

Reference material:
{chunks}

Subtasks:
{subtasks}

Task:
{instruction}

Previous program:
{program}

Error from the previous attempt:
{error}
)";
}

std::string render_prompt(std::string_view prompt_template, const GenerationRequest& request) {
  std::string chunks;
  for (const auto& c : request.chunks) chunks += "--- " + c.id + "\n" + c.text + "\n";
  if (chunks.empty()) chunks = "(none)\n";

  std::string subtasks;
  for (std::size_t i = 0; i < request.decomposition.subtasks.size(); ++i)
    subtasks += std::to_string(i + 1) + ". " + request.decomposition.subtasks[i] + "\n";
  const auto ids = [](const char* label, const std::vector<int>& v) {
    return v.empty() ? std::string() : std::string(label) + ": " + mcscript::detail::list_text(v) + "\n";
  };
  subtasks += ids("axes", request.decomposition.axes) + ids("inputs", request.decomposition.inputs) +
              ids("outputs", request.decomposition.outputs);

  const std::pair<std::string_view, std::string> subs[] = {
      {"{instruction}", request.instruction},
      {"{chunks}", chunks},
      {"{subtasks}", subtasks},
      {"{error}", request.prior_error.value_or("none")},
      {"{program}", request.prior_program.value_or("none")},
  };
  std::string out;
  std::size_t pos = 0;
  while (pos < prompt_template.size()) {
    bool replaced = false;
    if (prompt_template[pos] == '{') {
      for (const auto& [key, value] : subs) {
        if (prompt_template.substr(pos, key.size()) == key) {
          out += value;
          pos += key.size();
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out += prompt_template[pos++];
  }
  return out;
}

std::string extract_code(std::string_view reply) {
  const auto open = reply.find("```");
  if (open != std::string_view::npos) {
    const auto body = reply.find('\n', open);
    if (body != std::string_view::npos) {
      const auto close = reply.find("```", body + 1);
      if (close != std::string_view::npos) return std::string(reply.substr(body + 1, close - body - 1));
    }
  }
  std::size_t b = 0, e = reply.size();
  while (b < e && std::isspace(static_cast<unsigned char>(reply[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(reply[e - 1]))) --e;
  return std::string(reply.substr(b, e - b));
}

}  // namespace mocsim::pipeline
