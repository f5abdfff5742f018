#include <algorithm>
#include <cctype>
#include <regex>

#include "mocsim/pipeline.hpp"

namespace mocsim::pipeline {
namespace {

std::string trim_clause(std::string s) {
  auto junk = [](char c) { return std::isspace(static_cast<unsigned char>(c)) || c == ',' || c == ';'; };
  while (!s.empty() && junk(s.front())) s.erase(s.begin());
  while (!s.empty() && (junk(s.back()) || s.back() == '.')) s.pop_back();
  return s;
}

void add_ids(const std::string& text, const std::regex& re, std::vector<int>& out) {
  for (auto it = std::sregex_iterator(text.begin(), text.end(), re); it != std::sregex_iterator(); ++it) {
    // Group 1 holds one id or a list such as "1, 2 and 3".
    const std::string list = (*it)[1];
    static const std::regex number(R"(\d+)");
    for (auto n = std::sregex_iterator(list.begin(), list.end(), number); n != std::sregex_iterator(); ++n)
      out.push_back(std::stoi(n->str()));
  }
}

void sort_unique(std::vector<int>& v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
}

}  // namespace

Decomposition decompose(std::string_view instruction) {
  Decomposition d;
  const std::string text(instruction);

  static const std::regex sentence_end(R"(\.\s+)");
  static const std::regex then_word(R"(\bthen\b)", std::regex::icase);
  for (auto s = std::sregex_token_iterator(text.begin(), text.end(), sentence_end, -1);
       s != std::sregex_token_iterator(); ++s) {
    const std::string sentence = *s;
    for (auto c = std::sregex_token_iterator(sentence.begin(), sentence.end(), then_word, -1);
         c != std::sregex_token_iterator(); ++c) {
      std::string clause = trim_clause(*c);
      if (!clause.empty()) d.subtasks.push_back(std::move(clause));
    }
  }

  static const std::regex axis(R"(\baxis\s+(\d+))", std::regex::icase);
  static const std::regex axes(R"(\baxes\s+(\d+(?:\s*(?:,|and|&)\s*\d+)*))", std::regex::icase);
  static const std::regex input(R"(\binputs?\s+(?:bits?\s+)?(\d+))", std::regex::icase);
  static const std::regex output(R"(\boutputs?\s+(?:bits?\s+)?(\d+))", std::regex::icase);
  add_ids(text, axis, d.axes);
  add_ids(text, axes, d.axes);
  add_ids(text, input, d.inputs);
  add_ids(text, output, d.outputs);
  sort_unique(d.axes);
  sort_unique(d.inputs);
  sort_unique(d.outputs);
  return d;
}

}  // namespace mocsim::pipeline
