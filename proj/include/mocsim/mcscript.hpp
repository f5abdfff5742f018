#pragma once

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mocsim/engine.hpp"

/// MCScript: a line-oriented, straight-line motion script.
///
///     # comment
///     StartPos axis=1 target=130.2 vel=1060 acc=11000 profile=SCurve
///     StartCircular axes=[1,2] center=[0,0] angle=90 vel=50 acc=500
///     Wait axis=1
///
/// One statement per line: a command name followed by `key=value` pairs.
/// Values are decimal numbers, lists `[a,b,c]`, or words (which may contain
/// spaces; a word runs until the next `key=`).
namespace mocsim::mcscript {

struct SourceLocation {
  int line = 0;
  int column = 0;

  bool operator==(const SourceLocation&) const = default;
};

struct Value {
  enum class Kind { Number, List, Word };
  Kind kind = Kind::Word;
  double number = 0.0;
  std::vector<double> list;
  std::string word;
  SourceLocation location;

  static Value of_number(double v);
  static Value of_list(std::vector<double> v);
  static Value of_word(std::string v);

  /// Structural equality; locations are ignored.
  bool same_as(const Value& other) const;
};

struct Argument {
  std::string key;
  Value value;
  SourceLocation location;
};

struct Statement {
  std::string command;
  std::vector<Argument> args;
  SourceLocation location;

  const Argument* find(std::string_view key) const;
  bool same_as(const Statement& other) const;
};

struct Program {
  std::vector<Statement> statements;

  bool same_as(const Program& other) const;
};

enum class DiagnosticCategory { Syntax, Api, Argument };

std::string_view to_string(DiagnosticCategory category);

struct Diagnostic {
  DiagnosticCategory category = DiagnosticCategory::Syntax;
  std::string message;
  SourceLocation location;
  std::optional<std::string> suggestion;
};

/// `line:col: <Category> error: message`
std::string format(const Diagnostic& diagnostic);

struct ParseResult {
  Program program;  // statements that parsed cleanly
  std::vector<Diagnostic> diagnostics;

  bool ok() const { return diagnostics.empty(); }
};

/// Parses the whole text and collects every syntax error.
ParseResult parse(std::string_view text);

/// Canonical text form; parse(print(p)) is structurally equal to p.
std::string print(const Statement& statement);
std::string print(const Program& program);

/// Levenshtein distance (unit costs).
std::size_t edit_distance(std::string_view a, std::string_view b);

/// Nearest vocabulary entry after case folding and removing spaces and
/// underscores, if within edit distance 2. Ties go to the lexicographically
/// smaller entry.
std::optional<std::string> suggest(std::string_view token, std::span<const std::string_view> vocabulary);

/// Static checks against the command vocabulary and the device. An empty
/// result means the program will be accepted at dispatch.
std::vector<Diagnostic> validate(const Program& program, const engine::DeviceConfig& config);

/// Wraps a motion body with the device lifecycle: CreateDevice,
/// StartCommunication and StartLog (over every configured axis and bit) in
/// front, StopLog and CloseDevice at the end, each only when missing.
/// Idempotent.
Program preprocess(const Program& program, const engine::DeviceConfig& config);

/// Known command names, sorted.
std::span<const std::string_view> command_vocabulary();
std::span<const std::string_view> profile_vocabulary();

}  // namespace mocsim::mcscript
