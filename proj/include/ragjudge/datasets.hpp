// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include <json.hpp>

#include "ragjudge/core_types.hpp"
#include "ragjudge/errors.hpp"

namespace ragjudge::datasets {

// Sizes of the published evaluation sets: the re-annotated Natural Questions
// correctness subset and WikiEval.
inline constexpr std::size_t kExpectedCorrectnessSamples = 396;
inline constexpr std::size_t kExpectedFaithfulnessSamples = 50;

struct CorrectnessDataset {
  std::vector<CorrectnessSample> samples;
  std::string source_tag;
  std::vector<std::string> warnings;
};

struct FaithfulnessDataset {
  std::vector<FaithfulnessSample> samples;
  std::string source_tag;
  std::vector<std::string> warnings;
};

namespace detail {

inline std::string require_text(const json& rec, const char* field, std::vector<std::string>& problems) {
  if (!rec.contains(field)) {
    problems.push_back(std::string("missing field '") + field + "'");
    return {};
  }
  if (!rec[field].is_string()) {
    problems.push_back(std::string("field '") + field + "' must be a string");
    return {};
  }
  auto value = rec[field].get<std::string>();
  if (ragjudge::detail::trim(value).empty()) problems.push_back(std::string("field '") + field + "' is empty");
  return value;
}

// Calls `parse(record, problems)` on every non-blank line. Validation
// problems from all lines are collected and thrown together; duplicate ids
// are reported at the first repeat.
template <typename Sample, typename Parse>
std::vector<Sample> load_jsonl(const std::filesystem::path& path, Parse parse) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FileNotFound("dataset file not found: " + path.string());

  std::vector<Sample> samples;
  std::vector<RecordIssue> issues;
  std::unordered_map<std::string, std::size_t> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (ragjudge::detail::trim(line).empty()) continue;
    const auto rec = json::parse(line, nullptr, false);
    if (rec.is_discarded() || !rec.is_object()) {
      issues.push_back({line_no, "not a JSON object"});
      continue;
    }
    std::vector<std::string> problems;
    Sample sample = parse(rec, problems);
    if (!problems.empty()) {
      for (auto& p : problems) issues.push_back({line_no, std::move(p)});
      continue;
    }
    if (!ids.emplace(sample.id, line_no).second) throw DuplicateId(sample.id, line_no);
    samples.push_back(std::move(sample));
  }
  if (!issues.empty()) throw RecordValidationError(std::move(issues));
  return samples;
}

inline std::string cardinality_warning(std::size_t got, std::size_t expected, const char* what) {
  if (got == expected) return {};
  return std::string(what) + " has " + std::to_string(got) + " samples; the published set has " +
         std::to_string(expected);
}

}  // namespace detail

inline CorrectnessSample parse_correctness_record(const json& rec, std::vector<std::string>& problems) {
  CorrectnessSample s;
  s.id = detail::require_text(rec, "id", problems);
  s.question = detail::require_text(rec, "question", problems);
  s.answer = detail::require_text(rec, "answer", problems);
  s.ground_truth = detail::require_text(rec, "ground_truth", problems);
  if (!rec.contains("human_label")) {
    problems.emplace_back("missing field 'human_label'");
  } else if (!rec["human_label"].is_number_integer() ||
             (rec["human_label"].get<std::int64_t>() != 0 && rec["human_label"].get<std::int64_t>() != 1)) {
    problems.push_back("human_label must be 0 or 1, got " + rec["human_label"].dump());
  } else {
    s.human_label = rec["human_label"].get<int>();
  }
  return s;
}

inline FaithfulnessSample parse_faithfulness_record(const json& rec, std::vector<std::string>& problems) {
  FaithfulnessSample s;
  s.id = detail::require_text(rec, "id", problems);
  s.question = detail::require_text(rec, "question", problems);
  s.context = detail::require_text(rec, "context", problems);
  s.good_answer = detail::require_text(rec, "good_answer", problems);
  s.poor_answer = detail::require_text(rec, "poor_answer", problems);
  return s;
}

inline CorrectnessDataset load_correctness(const std::filesystem::path& path) {
  CorrectnessDataset ds;
  ds.samples = detail::load_jsonl<CorrectnessSample>(path, parse_correctness_record);
  ds.source_tag = path.filename().string();
  if (auto w = detail::cardinality_warning(ds.samples.size(), kExpectedCorrectnessSamples, "correctness set");
      !w.empty()) {
    ds.warnings.push_back(std::move(w));
  }
  return ds;
}

inline FaithfulnessDataset load_faithfulness(const std::filesystem::path& path) {
  FaithfulnessDataset ds;
  ds.samples = detail::load_jsonl<FaithfulnessSample>(path, parse_faithfulness_record);
  ds.source_tag = path.filename().string();
  if (auto w = detail::cardinality_warning(ds.samples.size(), kExpectedFaithfulnessSamples, "faithfulness set");
      !w.empty()) {
    ds.warnings.push_back(std::move(w));
  }
  return ds;
}

template <typename Sample>
void write_jsonl(const std::filesystem::path& path, const std::vector<Sample>& samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  for (const auto& s : samples) out << json(s).dump() << '\n';
}

}  // namespace ragjudge::datasets
