// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "ragjudge/core_types.hpp"
#include "ragjudge/errors.hpp"
#include "ragjudge/prompt_defaults.hpp"

namespace ragjudge::prompts {

enum class TemplateName {
  StatementExtraction,
  CorrectnessVerdict,
  FaithfulnessVerdict,
  ConstrainedParseCorrectness,
  ConstrainedParseFaithfulness,
};

inline constexpr std::array<TemplateName, 5> kAllTemplates = {
    TemplateName::StatementExtraction,         TemplateName::CorrectnessVerdict,
    TemplateName::FaithfulnessVerdict,         TemplateName::ConstrainedParseCorrectness,
    TemplateName::ConstrainedParseFaithfulness,
};

inline constexpr std::string_view to_string(TemplateName name) {
  switch (name) {
    case TemplateName::StatementExtraction: return "statement_extraction";
    case TemplateName::CorrectnessVerdict: return "correctness_verdict";
    case TemplateName::FaithfulnessVerdict: return "faithfulness_verdict";
    case TemplateName::ConstrainedParseCorrectness: return "constrained_parse_correctness";
    case TemplateName::ConstrainedParseFaithfulness: return "constrained_parse_faithfulness";
  }
  return "";
}

inline std::string_view default_body(TemplateName name) {
  switch (name) {
    case TemplateName::StatementExtraction: return defaults::kStatementExtraction;
    case TemplateName::CorrectnessVerdict: return defaults::kCorrectnessVerdict;
    case TemplateName::FaithfulnessVerdict: return defaults::kFaithfulnessVerdict;
    case TemplateName::ConstrainedParseCorrectness: return defaults::kConstrainedParseCorrectness;
    case TemplateName::ConstrainedParseFaithfulness: return defaults::kConstrainedParseFaithfulness;
  }
  return {};
}

// A placeholder is `{name}` with name drawn from [a-z_]. Other braces (the
// JSON-looking few-shot examples) are literal text.
struct PlaceholderSpan {
  std::size_t begin{0};  // position of '{'
  std::size_t end{0};    // one past '}'
  std::string name;
};

inline std::vector<PlaceholderSpan> find_placeholders(std::string_view body) {
  std::vector<PlaceholderSpan> found;
  std::size_t pos = 0;
  while ((pos = body.find('{', pos)) != std::string_view::npos) {
    std::size_t j = pos + 1;
    while (j < body.size() && ((body[j] >= 'a' && body[j] <= 'z') || body[j] == '_')) ++j;
    if (j > pos + 1 && j < body.size() && body[j] == '}') {
      found.push_back({pos, j + 1, std::string(body.substr(pos + 1, j - pos - 1))});
      pos = j + 1;
    } else {
      ++pos;
    }
  }
  return found;
}

struct PromptTemplate {
  TemplateName name{TemplateName::StatementExtraction};
  std::string body;

  std::set<std::string> placeholders() const {
    std::set<std::string> names;
    for (auto& p : find_placeholders(body)) names.insert(p.name);
    return names;
  }

  static PromptTemplate builtin(TemplateName n) { return {n, std::string(default_body(n))}; }
};

using Bindings = std::map<std::string, std::string, std::less<>>;

// Substitutes every placeholder. Bound values are inserted verbatim and never
// rescanned, so a value containing "{x}" stays as written.
inline std::string render(const PromptTemplate& tmpl, const Bindings& bindings) {
  const auto spans = find_placeholders(tmpl.body);
  std::set<std::string, std::less<>> used;
  for (const auto& span : spans) {
    if (!bindings.contains(span.name)) throw MissingBinding(span.name);
    used.insert(span.name);
  }
  for (const auto& [name, value] : bindings) {
    if (!used.contains(name)) throw UnknownPlaceholder(name);
  }

  std::string out;
  out.reserve(tmpl.body.size());
  std::size_t cursor = 0;
  for (const auto& span : spans) {
    out.append(tmpl.body, cursor, span.begin - cursor);
    out += bindings.find(span.name)->second;
    cursor = span.end;
  }
  out.append(tmpl.body, cursor, std::string::npos);
  return out;
}

// The five templates used by a run. Files named `<template>.txt` in a
// directory override the built-in bodies one by one.
class TemplateSet {
 public:
  TemplateSet() {
    for (auto n : kAllTemplates) templates_.emplace(n, PromptTemplate::builtin(n));
  }

  static TemplateSet load(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) throw ConfigError("template directory not found: " + dir.string());
    TemplateSet set;
    for (auto n : kAllTemplates) {
      const auto file = dir / (std::string(to_string(n)) + ".txt");
      if (!std::filesystem::exists(file)) continue;
      std::ifstream in(file, std::ios::binary);
      std::stringstream buffer;
      buffer << in.rdbuf();
      set.templates_[n] = PromptTemplate{n, buffer.str()};
    }
    return set;
  }

  const PromptTemplate& get(TemplateName n) const { return templates_.at(n); }

  void write(const std::filesystem::path& dir) const {
    std::filesystem::create_directories(dir);
    for (const auto& [n, t] : templates_) {
      std::ofstream out(dir / (std::string(to_string(n)) + ".txt"), std::ios::binary);
      out << t.body;
    }
  }

 private:
  std::map<TemplateName, PromptTemplate> templates_;
};

// ---------------- sentences and statements ----------------

// Splits on '.', '!' or '?' followed by whitespace or end of text and numbers
// the pieces "0:...", "1:...". Abbreviations are not special-cased.
inline std::vector<std::string> split_sentences(std::string_view answer) {
  std::vector<std::string> pieces;
  std::size_t start = 0;
  const auto flush = [&](std::size_t end) {
    const auto piece = detail::trim(answer.substr(start, end - start));
    if (!piece.empty()) pieces.emplace_back(piece);
    start = end;
  };
  for (std::size_t i = 0; i < answer.size(); ++i) {
    const char c = answer[i];
    if (c != '.' && c != '!' && c != '?') continue;
    const bool at_end = i + 1 == answer.size();
    if (at_end || std::isspace(static_cast<unsigned char>(answer[i + 1]))) flush(i + 1);
  }
  flush(answer.size());

  std::vector<std::string> numbered;
  numbered.reserve(pieces.size());
  for (std::size_t i = 0; i < pieces.size(); ++i) numbered.push_back(std::to_string(i) + ":" + pieces[i]);
  return numbered;
}

inline std::string join_lines(const std::vector<std::string>& lines) {
  std::string out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (i) out += '\n';
    out += lines[i];
  }
  return out;
}

inline constexpr std::size_t kMinStatementLength = 2;

// Every line whose first non-blank character is '-' becomes a statement with
// that one hyphen removed. Nested lists flatten. Fragments shorter than two
// characters are noise and dropped.
inline std::vector<Statement> parse_statement_list(std::string_view raw) {
  std::vector<Statement> statements;
  std::size_t pos = 0;
  while (pos <= raw.size()) {
    auto eol = raw.find('\n', pos);
    if (eol == std::string_view::npos) eol = raw.size();
    const auto line = detail::trim(raw.substr(pos, eol - pos));
    if (!line.empty() && line.front() == '-') {
      const auto text = detail::trim(line.substr(1));
      if (text.size() >= kMinStatementLength) statements.push_back({statements.size(), std::string(text)});
    }
    pos = eol + 1;
  }
  if (statements.empty()) throw NoStatementsFound("no hyphen-prefixed statements in simplifier output");
  return statements;
}

// Same as parse_statement_list, but an output without a usable list turns the
// original text into a single statement.
inline std::vector<Statement> parse_statement_list_or(std::string_view raw, std::string_view original) {
  try {
    return parse_statement_list(raw);
  } catch (const NoStatementsFound&) {
    std::string flat(detail::trim(original));
    for (auto& ch : flat) {
      if (ch == '\n' || ch == '\r') ch = ' ';
    }
    return {Statement{0, flat}};
  }
}

inline std::string format_statement_list(const std::vector<Statement>& statements) {
  std::string out;
  for (const auto& s : statements) {
    if (!out.empty()) out += '\n';
    out += "- " + s.text;
  }
  return out;
}

// ---------------- per-stage prompt builders ----------------

inline std::string statement_extraction_prompt(const TemplateSet& set, std::string_view question,
                                               std::string_view text) {
  return render(set.get(TemplateName::StatementExtraction),
                {{"question", std::string(question)},
                 {"answer", std::string(text)},
                 {"sentences", join_lines(split_sentences(text))}});
}

inline std::string correctness_verdict_prompt(const TemplateSet& set, std::string_view question,
                                              const std::vector<Statement>& answer_statements,
                                              const std::vector<Statement>& truth_statements) {
  return render(set.get(TemplateName::CorrectnessVerdict),
                {{"question", std::string(question)},
                 {"statements_answer", format_statement_list(answer_statements)},
                 {"statements_groundtruth", format_statement_list(truth_statements)}});
}

inline std::string faithfulness_verdict_prompt(const TemplateSet& set, std::string_view context,
                                               const std::vector<Statement>& statements) {
  return render(set.get(TemplateName::FaithfulnessVerdict),
                {{"context", std::string(context)}, {"statements", format_statement_list(statements)}});
}

}  // namespace ragjudge::prompts
