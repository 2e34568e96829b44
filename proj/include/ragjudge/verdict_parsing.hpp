// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <iterator>
#include <optional>
#include <random>
#include <regex>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ragjudge/automaton.hpp"
#include "ragjudge/backend.hpp"
#include "ragjudge/core_types.hpp"
#include "ragjudge/errors.hpp"
#include "ragjudge/prompting.hpp"
#include "ragjudge/schema.hpp"

namespace ragjudge::verdicts {

enum class Metric { Correctness, Faithfulness };

enum class ParsingStrategy { Regex1, Regex2, Constrained };

inline std::string_view to_string(ParsingStrategy s) {
  switch (s) {
    case ParsingStrategy::Regex1: return "r1";
    case ParsingStrategy::Regex2: return "r2";
    case ParsingStrategy::Constrained: return "c";
  }
  return "";
}

inline ParsingStrategy parse_strategy(std::string_view text) {
  if (text == "r1" || text == "regex1") return ParsingStrategy::Regex1;
  if (text == "r2" || text == "regex2") return ParsingStrategy::Regex2;
  if (text == "c" || text == "constrained") return ParsingStrategy::Constrained;
  throw ConfigError("unknown parsing strategy '" + std::string(text) + "' (expected r1, r2 or c)");
}

inline const std::vector<std::string>& labels_for(Metric m) {
  static const std::vector<std::string> correctness{"TP", "FP", "FN"};
  static const std::vector<std::string> faithfulness{"PASSED", "FAILED"};
  return m == Metric::Correctness ? correctness : faithfulness;
}

// Regex 1: "\bVERDICT: <LABEL>\b". Regex 2 lets other characters sit between
// "VERDICT: " and the label. '.' never crosses a line break, and the
// quantifier is lazy so two verdicts on one line are both counted.
inline std::string verdict_pattern(std::string_view label, ParsingStrategy strategy) {
  if (strategy == ParsingStrategy::Constrained) throw std::invalid_argument("constrained parsing has no pattern");
  const std::string gap = strategy == ParsingStrategy::Regex2 ? ".*?" : "";
  return "\\bVERDICT: " + gap + std::string(label) + "\\b";
}

namespace detail {

// Compiled once per (metric, strategy); std::regex is safe to share for matching.
inline const std::vector<std::regex>& compiled(Metric m, ParsingStrategy s) {
  const auto build = [](Metric metric, ParsingStrategy strategy) {
    std::vector<std::regex> out;
    for (const auto& label : labels_for(metric)) out.emplace_back(verdict_pattern(label, strategy));
    return out;
  };
  static const std::array<std::vector<std::regex>, 4> table = {
      build(Metric::Correctness, ParsingStrategy::Regex1), build(Metric::Correctness, ParsingStrategy::Regex2),
      build(Metric::Faithfulness, ParsingStrategy::Regex1), build(Metric::Faithfulness, ParsingStrategy::Regex2)};
  if (s == ParsingStrategy::Constrained) throw std::invalid_argument("constrained parsing has no pattern");
  return table[(m == Metric::Faithfulness ? 2 : 0) + (s == ParsingStrategy::Regex2 ? 1 : 0)];
}

inline std::int64_t count_matches(const std::string& text, const std::regex& re) {
  return static_cast<std::int64_t>(
      std::distance(std::sregex_iterator(text.begin(), text.end(), re), std::sregex_iterator()));
}

inline std::vector<std::int64_t> label_counts(std::string_view raw, Metric m, ParsingStrategy s) {
  const std::string text(raw);
  std::vector<std::int64_t> counts;
  for (const auto& re : compiled(m, s)) counts.push_back(count_matches(text, re));
  return counts;
}

inline std::vector<std::string_view> lines_of(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    auto eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    lines.push_back(text.substr(pos, eol - pos));
    pos = eol + 1;
  }
  return lines;
}

}  // namespace detail

inline CorrectnessCounts parse_regex_correctness(std::string_view raw, ParsingStrategy strategy) {
  const auto c = detail::label_counts(raw, Metric::Correctness, strategy);
  if (c[0] + c[1] + c[2] == 0) throw ZeroVerdicts("no TP/FP/FN verdicts found in judge output");
  return CorrectnessCounts(c[0], c[1], c[2]);
}

inline CorrectnessCounts parse_regex1_correctness(std::string_view raw) {
  return parse_regex_correctness(raw, ParsingStrategy::Regex1);
}

inline CorrectnessCounts parse_regex2_correctness(std::string_view raw) {
  return parse_regex_correctness(raw, ParsingStrategy::Regex2);
}

inline FaithfulnessCounts parse_regex_faithfulness(std::string_view raw, ParsingStrategy strategy) {
  const auto c = detail::label_counts(raw, Metric::Faithfulness, strategy);
  if (c[0] + c[1] == 0) throw ZeroVerdicts("no PASSED/FAILED verdicts found in judge output");
  return FaithfulnessCounts(c[0], c[1]);
}

// Lines on which more than one label pattern matches. Each such line counts
// once per matching pattern; this reports how often that happened.
inline std::size_t multi_label_lines(std::string_view raw, Metric metric, ParsingStrategy strategy) {
  const auto& patterns = detail::compiled(metric, strategy);
  std::size_t lines = 0;
  for (auto line : detail::lines_of(raw)) {
    const std::string text(line);
    int hits = 0;
    for (const auto& re : patterns) hits += std::regex_search(text, re) ? 1 : 0;
    if (hits > 1) ++lines;
  }
  return lines;
}

// ---------------- constrained generation ----------------

// The judge's labelled lines renumbered "- Statement<i> ..." (1-based) for the
// re-structuring prompt. Lines mentioning VERDICT are taken; without any, all
// hyphen lines are.
struct ClassifiedStatements {
  std::vector<std::string> lines;  // original text of each statement line, trimmed
  std::string prompt_block;

  std::size_t count() const { return lines.size(); }
};

inline ClassifiedStatements classified_statements(std::string_view raw) {
  ClassifiedStatements out;
  const auto all = detail::lines_of(raw);
  const auto collect = [&](auto keep) {
    for (auto line : all) {
      auto t = ragjudge::detail::trim(line);
      if (!t.empty() && keep(t)) out.lines.emplace_back(t);
    }
  };
  collect([](std::string_view t) { return t.find("VERDICT") != std::string_view::npos; });
  if (out.lines.empty()) collect([](std::string_view t) { return t.front() == '-'; });
  for (std::size_t i = 0; i < out.lines.size(); ++i) {
    auto body = std::string_view(out.lines[i]);
    if (!body.empty() && body.front() == '-') body = ragjudge::detail::trim(body.substr(1));
    if (i) out.prompt_block += '\n';
    out.prompt_block += "- Statement" + std::to_string(i + 1) + " " + std::string(body);
  }
  return out;
}

// Label index (into labels_for(metric)) of each classified line, or -1 when no
// verdict pattern matches. Exact verdicts win over permissive ones; among
// several, the earliest occurrence on the line wins.
inline std::vector<int> line_labels(const ClassifiedStatements& statements, Metric metric) {
  std::vector<int> labels;
  for (const auto& line : statements.lines) {
    int chosen = -1;
    for (auto strategy : {ParsingStrategy::Regex1, ParsingStrategy::Regex2}) {
      std::ptrdiff_t best = -1;
      const auto& patterns = detail::compiled(metric, strategy);
      for (std::size_t k = 0; k < patterns.size(); ++k) {
        std::smatch m;
        if (std::regex_search(line, m, patterns[k]) && (best < 0 || m.position(0) < best)) {
          best = m.position(0);
          chosen = static_cast<int>(k);
        }
      }
      if (chosen >= 0) break;
    }
    labels.push_back(chosen);
  }
  return labels;
}

// Counts from a {label: [indices]} document. Lists absent from the document
// count as empty. Every index 1..statement_count must occur exactly once
// across all lists.
inline VerdictCounts counts_from_lists(const json& doc, Metric metric, std::size_t statement_count) {
  if (!doc.is_object()) throw IndexCoverageError("verdict document is not an object");
  const auto& labels = labels_for(metric);
  std::vector<int> seen(statement_count + 1, 0);
  std::vector<std::int64_t> sizes;
  for (const auto& label : labels) {
    std::int64_t size = 0;
    if (doc.contains(label)) {
      const auto& list = doc[label];
      if (!list.is_array()) throw IndexCoverageError("'" + label + "' is not a list");
      for (const auto& item : list) {
        if (!item.is_number_integer()) throw IndexCoverageError("'" + label + "' holds a non-integer entry");
        const auto index = item.get<std::int64_t>();
        if (index < 1 || static_cast<std::size_t>(index) > statement_count) {
          throw IndexCoverageError("statement index " + std::to_string(index) + " out of range 1.." +
                                   std::to_string(statement_count));
        }
        if (seen[static_cast<std::size_t>(index)]++) {
          throw IndexCoverageError("statement " + std::to_string(index) + " appears in more than one place");
        }
        ++size;
      }
    }
    sizes.push_back(size);
  }
  for (std::size_t i = 1; i <= statement_count; ++i) {
    if (!seen[i]) throw IndexCoverageError("statement " + std::to_string(i) + " is missing from every list");
  }
  if (metric == Metric::Correctness) return CorrectnessCounts(sizes[0], sizes[1], sizes[2]);
  return FaithfulnessCounts(sizes[0], sizes[1]);
}

// Schema sent with the re-structuring request. Lists are not individually
// required; a missing list surfaces as an index coverage error instead.
inline json request_schema(Metric metric, std::size_t statement_count) {
  auto s = schema::label_list_schema(labels_for(metric), static_cast<std::int64_t>(statement_count));
  s.erase("required");
  return s;
}

struct ConstrainedParseOutcome {
  VerdictCounts counts;
  std::string structured_json;
  int attempts{1};
};

// Re-structures a judge output with a second, schema-constrained generation
// and counts list lengths.
inline ConstrainedParseOutcome constrained_parse(std::string_view raw_classified, Metric metric,
                                                 std::size_t statement_count, backend::Client& client,
                                                 const prompts::TemplateSet& templates,
                                                 const backend::GenerationRequest& base) {
  if (statement_count == 0) throw std::invalid_argument("statement_count must be at least 1");
  const auto statements = classified_statements(raw_classified);
  const auto name = metric == Metric::Correctness ? prompts::TemplateName::ConstrainedParseCorrectness
                                                  : prompts::TemplateName::ConstrainedParseFaithfulness;
  const auto block = statements.count() ? statements.prompt_block : std::string(raw_classified);

  backend::GenerationRequest request = base;
  request.user_text = prompts::render(templates.get(name), {{"statements", block}});
  request.schema = request_schema(metric, statement_count);
  auto result = client.generate_constrained(request);
  const auto doc = json::parse(result.text);
  return {counts_from_lists(doc, metric, statement_count), result.text, result.attempt_count};
}

// Local variant: masked decoding over the schema automaton driven by a token
// model that follows the labels found on each classified line.
template <typename Rng>
VerdictCounts constrained_parse_local(std::string_view raw_classified, Metric metric, Rng& rng,
                                      double temperature = 0.0) {
  const auto statements = classified_statements(raw_classified);
  if (statements.count() == 0) throw ZeroVerdicts("no classified statements to restructure");
  const auto label_schema = schema::label_list_schema(labels_for(metric));
  const automaton::SchemaAutomaton fsa(label_schema, statements.count());
  const auto decoded = automaton::decode_constrained(
      fsa, automaton::label_following_scorer(line_labels(statements, metric)), rng, {temperature});
  return counts_from_lists(json::parse(decoded.text), metric, statements.count());
}

}  // namespace ragjudge::verdicts
