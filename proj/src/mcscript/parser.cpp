#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <cmath>

#include "mocsim/mcscript.hpp"

namespace mocsim::mcscript {
namespace {

bool is_ident_start(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_'; }
bool is_ident(char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_'; }
bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r'; }

bool looks_numeric(std::string_view s) {
  if (s.empty()) return false;
  const char c = s.front();
  return std::isdigit(static_cast<unsigned char>(c)) || c == '-' || c == '+' || c == '.';
}

std::optional<double> parse_double(std::string_view s) {
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// True when `line` at `pos` starts a `key=` token.
bool at_key(std::string_view line, std::size_t pos) {
  if (pos >= line.size() || !is_ident_start(line[pos])) return false;
  while (pos < line.size() && is_ident(line[pos])) ++pos;
  return pos < line.size() && line[pos] == '=';
}

class LineParser {
 public:
  LineParser(std::string_view line, int line_no, std::vector<Diagnostic>& diags)
      : line_(line), line_no_(line_no), diags_(diags) {}

  std::optional<Statement> run() {
    skip_space();
    if (pos_ >= line_.size()) return std::nullopt;
    Statement st;
    st.location = here();
    const std::size_t start = pos_;
    while (pos_ < line_.size() && !is_space(line_[pos_])) ++pos_;
    st.command = std::string(line_.substr(start, pos_ - start));
    if (!is_ident_start(st.command.front()) ||
        !std::all_of(st.command.begin(), st.command.end(), is_ident)) {
      error(st.location, "invalid command name '" + st.command + "'");
      return std::nullopt;
    }
    while (true) {
      skip_space();
      if (pos_ >= line_.size()) break;
      auto arg = argument();
      if (!arg) return std::nullopt;
      st.args.push_back(std::move(*arg));
    }
    return st;
  }

 private:
  SourceLocation here() const { return {line_no_, static_cast<int>(pos_) + 1}; }

  void skip_space() {
    while (pos_ < line_.size() && is_space(line_[pos_])) ++pos_;
  }

  void error(SourceLocation loc, std::string message) {
    diags_.push_back({DiagnosticCategory::Syntax, std::move(message), loc, std::nullopt});
  }

  std::optional<Argument> argument() {
    Argument arg;
    arg.location = here();
    const std::size_t start = pos_;
    while (pos_ < line_.size() && is_ident(line_[pos_])) ++pos_;
    arg.key = std::string(line_.substr(start, pos_ - start));
    if (pos_ >= line_.size() || line_[pos_] != '=') {
      std::size_t end = pos_;
      while (end < line_.size() && !is_space(line_[end])) ++end;
      error(arg.location, "missing '=' after '" + std::string(line_.substr(start, end - start)) + "'");
      return std::nullopt;
    }
    if (arg.key.empty() || !is_ident_start(arg.key.front())) {
      error(arg.location, "missing argument name before '='");
      return std::nullopt;
    }
    ++pos_;  // '='
    const SourceLocation value_loc = here();
    if (pos_ >= line_.size() || is_space(line_[pos_])) {
      error(value_loc, "empty value for '" + arg.key + "'");
      return std::nullopt;
    }
    if (line_[pos_] == '[') {
      auto value = list(value_loc);
      if (!value) return std::nullopt;
      arg.value = std::move(*value);
      return arg;
    }
    // A word value runs up to the next `key=` token.
    const std::size_t vstart = pos_;
    std::size_t vend = pos_;
    while (pos_ < line_.size()) {
      while (pos_ < line_.size() && !is_space(line_[pos_])) ++pos_;
      vend = pos_;
      skip_space();
      if (pos_ >= line_.size() || at_key(line_, pos_)) break;
    }
    std::string text;
    for (std::size_t i = vstart; i < vend; ++i) {
      if (is_space(line_[i])) {
        if (!text.empty() && text.back() != ' ') text += ' ';
      } else {
        text += line_[i];
      }
    }
    if (looks_numeric(text)) {
      auto number = parse_double(text);
      if (!number) {
        error(value_loc, "bad number '" + text + "' for '" + arg.key + "'");
        return std::nullopt;
      }
      arg.value = Value::of_number(*number);
    } else {
      arg.value = Value::of_word(std::move(text));
    }
    arg.value.location = value_loc;
    return arg;
  }

  std::optional<Value> list(SourceLocation loc) {
    const auto close = line_.find(']', pos_);
    if (close == std::string_view::npos) {
      error(loc, "unterminated list");
      return std::nullopt;
    }
    const std::string_view body = line_.substr(pos_ + 1, close - pos_ - 1);
    pos_ = close + 1;
    if (pos_ < line_.size() && !is_space(line_[pos_])) {
      error(here(), "unexpected characters after list");
      return std::nullopt;
    }
    std::vector<double> items;
    if (!trim(body).empty()) {
      std::size_t start = 0;
      while (true) {
        const auto comma = body.find(',', start);
        const auto item = trim(body.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
        auto number = parse_double(item);
        if (!number) {
          error(loc, "bad number '" + std::string(item) + "' in list");
          return std::nullopt;
        }
        items.push_back(*number);
        if (comma == std::string_view::npos) break;
        start = comma + 1;
      }
    }
    Value v = Value::of_list(std::move(items));
    v.location = loc;
    return v;
  }

  std::string_view line_;
  int line_no_;
  std::vector<Diagnostic>& diags_;
  std::size_t pos_ = 0;
};

void append_number(std::string& out, double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  out.append(buf.data(), ptr);
}

}  // namespace

Value Value::of_number(double v) {
  Value out;
  out.kind = Kind::Number;
  out.number = v;
  return out;
}

Value Value::of_list(std::vector<double> v) {
  Value out;
  out.kind = Kind::List;
  out.list = std::move(v);
  return out;
}

Value Value::of_word(std::string v) {
  Value out;
  out.kind = Kind::Word;
  out.word = std::move(v);
  return out;
}

bool Value::same_as(const Value& other) const {
  if (kind != other.kind) return false;
  switch (kind) {
    case Kind::Number: return number == other.number;
    case Kind::List: return list == other.list;
    case Kind::Word: return word == other.word;
  }
  return false;
}

const Argument* Statement::find(std::string_view key) const {
  for (const auto& a : args)
    if (a.key == key) return &a;
  return nullptr;
}

bool Statement::same_as(const Statement& other) const {
  if (command != other.command || args.size() != other.args.size()) return false;
  for (std::size_t i = 0; i < args.size(); ++i)
    if (args[i].key != other.args[i].key || !args[i].value.same_as(other.args[i].value)) return false;
  return true;
}

bool Program::same_as(const Program& other) const {
  if (statements.size() != other.statements.size()) return false;
  for (std::size_t i = 0; i < statements.size(); ++i)
    if (!statements[i].same_as(other.statements[i])) return false;
  return true;
}

std::string_view to_string(DiagnosticCategory category) {
  switch (category) {
    case DiagnosticCategory::Syntax: return "Syntax";
    case DiagnosticCategory::Api: return "Api";
    case DiagnosticCategory::Argument: return "Argument";
  }
  return "Unknown";
}

std::string format(const Diagnostic& d) {
  return std::to_string(d.location.line) + ":" + std::to_string(d.location.column) + ": " +
         std::string(to_string(d.category)) + " error: " + d.message;
}

ParseResult parse(std::string_view text) {
  ParseResult result;
  int line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto nl = text.find('\n', start);
    std::string_view line = text.substr(start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (auto st = LineParser(line, line_no, result.diagnostics).run()) result.program.statements.push_back(std::move(*st));
    if (nl == std::string_view::npos) break;
    start = nl + 1;
  }
  return result;
}

std::string print(const Statement& statement) {
  std::string out = statement.command;
  for (const auto& a : statement.args) {
    out += ' ';
    out += a.key;
    out += '=';
    switch (a.value.kind) {
      case Value::Kind::Number: append_number(out, a.value.number); break;
      case Value::Kind::Word: out += a.value.word; break;
      case Value::Kind::List:
        out += '[';
        for (std::size_t i = 0; i < a.value.list.size(); ++i) {
          if (i) out += ',';
          append_number(out, a.value.list[i]);
        }
        out += ']';
        break;
    }
  }
  return out;
}

std::string print(const Program& program) {
  std::string out;
  for (const auto& st : program.statements) {
    out += print(st);
    out += '\n';
  }
  return out;
}

}  // namespace mocsim::mcscript
