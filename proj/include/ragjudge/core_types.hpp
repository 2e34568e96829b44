// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <json.hpp>

#include "ragjudge/errors.hpp"

namespace ragjudge {

using json = nlohmann::json;

namespace detail {

inline std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  const auto begin = s.find_first_not_of(ws);
  if (begin == std::string_view::npos) return {};
  const auto end = s.find_last_not_of(ws);
  return s.substr(begin, end - begin + 1);
}

inline std::int64_t require_non_negative(std::int64_t v, const char* field) {
  if (v < 0) throw std::invalid_argument(std::string(field) + " must be non-negative, got " + std::to_string(v));
  return v;
}

}  // namespace detail

// One atomic declarative fact taken from an answer, a ground truth or a
// candidate answer. Identity is (index, text); duplicate texts are allowed.
struct Statement {
  std::size_t index{0};
  std::string text;

  friend bool operator==(const Statement&, const Statement&) = default;
};

inline bool is_valid_statement_list(const std::vector<Statement>& statements) {
  for (std::size_t i = 0; i < statements.size(); ++i) {
    if (statements[i].index != i || detail::trim(statements[i].text).empty()) return false;
  }
  return true;
}

enum class CorrectnessLabel { TP, FP, FN };
enum class FaithfulnessLabel { PASSED, FAILED };

inline constexpr std::string_view to_string(CorrectnessLabel label) {
  switch (label) {
    case CorrectnessLabel::TP: return "TP";
    case CorrectnessLabel::FP: return "FP";
    case CorrectnessLabel::FN: return "FN";
  }
  return "?";
}

inline constexpr std::string_view to_string(FaithfulnessLabel label) {
  return label == FaithfulnessLabel::PASSED ? "PASSED" : "FAILED";
}

// Tallies of judged statements for the correctness task.
class CorrectnessCounts {
 public:
  CorrectnessCounts() = default;
  CorrectnessCounts(std::int64_t tp, std::int64_t fp, std::int64_t fn)
      : tp_(detail::require_non_negative(tp, "tp")),
        fp_(detail::require_non_negative(fp, "fp")),
        fn_(detail::require_non_negative(fn, "fn")) {}

  std::int64_t tp() const { return tp_; }
  std::int64_t fp() const { return fp_; }
  std::int64_t fn() const { return fn_; }
  std::int64_t total() const { return tp_ + fp_ + fn_; }

  std::int64_t count(CorrectnessLabel label) const {
    switch (label) {
      case CorrectnessLabel::TP: return tp_;
      case CorrectnessLabel::FP: return fp_;
      case CorrectnessLabel::FN: return fn_;
    }
    return 0;
  }

  friend bool operator==(const CorrectnessCounts&, const CorrectnessCounts&) = default;

 private:
  std::int64_t tp_{0};
  std::int64_t fp_{0};
  std::int64_t fn_{0};
};

// Tallies of judged statements for the faithfulness task.
class FaithfulnessCounts {
 public:
  FaithfulnessCounts() = default;
  FaithfulnessCounts(std::int64_t passed, std::int64_t failed)
      : passed_(detail::require_non_negative(passed, "passed")),
        failed_(detail::require_non_negative(failed, "failed")) {}

  std::int64_t passed() const { return passed_; }
  std::int64_t failed() const { return failed_; }
  std::int64_t total() const { return passed_ + failed_; }

  std::int64_t count(FaithfulnessLabel label) const {
    return label == FaithfulnessLabel::PASSED ? passed_ : failed_;
  }

  friend bool operator==(const FaithfulnessCounts&, const FaithfulnessCounts&) = default;

 private:
  std::int64_t passed_{0};
  std::int64_t failed_{0};
};

using VerdictCounts = std::variant<CorrectnessCounts, FaithfulnessCounts>;

// Exact non-negative fraction. Scores are ratios of small counts, so ties
// between two scores are decided on these rather than on doubles.
class Ratio {
 public:
  Ratio() = default;
  Ratio(std::int64_t numerator, std::int64_t denominator) {
    if (denominator <= 0) throw std::invalid_argument("ratio denominator must be positive");
    if (numerator < 0) throw std::invalid_argument("ratio numerator must be non-negative");
    const auto g = std::gcd(numerator, denominator);
    num_ = numerator / g;
    den_ = denominator / g;
  }

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend bool operator==(const Ratio&, const Ratio&) = default;
  friend std::strong_ordering operator<=>(const Ratio& a, const Ratio& b) {
    const __int128 lhs = static_cast<__int128>(a.num_) * b.den_;
    const __int128 rhs = static_cast<__int128>(b.num_) * a.den_;
    return lhs <=> rhs;
  }

 private:
  std::int64_t num_{0};
  std::int64_t den_{1};
};

struct CorrectnessSample {
  std::string id;
  std::string question;
  std::string answer;        // RAG answer under evaluation
  std::string ground_truth;  // reference answer
  int human_label{0};        // 1 = judged correct by annotators

  friend bool operator==(const CorrectnessSample&, const CorrectnessSample&) = default;
};

struct FaithfulnessSample {
  std::string id;
  std::string question;
  std::string context;
  std::string good_answer;
  std::string poor_answer;

  friend bool operator==(const FaithfulnessSample&, const FaithfulnessSample&) = default;
};

using SampleCounts = std::variant<std::monostate, CorrectnessCounts, FaithfulnessCounts>;

// Score of one evaluated text. A null score marks a sample that could not be
// scored; `failure` then carries a short machine-readable reason.
struct SampleScore {
  std::string sample_id;
  std::optional<double> score;
  std::optional<Ratio> fraction;
  SampleCounts counts;
  std::string raw_judge_output;
  std::optional<std::string> failure;
  std::string failure_detail;

  bool scored() const { return score.has_value(); }

  static SampleScore from_ratio(std::string id, Ratio r, SampleCounts c, std::string raw = {}) {
    SampleScore s;
    s.sample_id = std::move(id);
    s.score = r.value();
    s.fraction = r;
    s.counts = std::move(c);
    s.raw_judge_output = std::move(raw);
    return s;
  }

  static SampleScore null(std::string id, std::string reason, std::string detail, std::string raw = {},
                          SampleCounts c = {}) {
    SampleScore s;
    s.sample_id = std::move(id);
    s.failure = std::move(reason);
    s.failure_detail = std::move(detail);
    s.raw_judge_output = std::move(raw);
    s.counts = std::move(c);
    return s;
  }

  friend bool operator==(const SampleScore&, const SampleScore&) = default;
};

// ---------------- canonical JSON records ----------------

inline void to_json(json& j, const Statement& s) { j = json{{"index", s.index}, {"text", s.text}}; }
inline void from_json(const json& j, Statement& s) {
  s.index = j.at("index").get<std::size_t>();
  s.text = j.at("text").get<std::string>();
}

inline void to_json(json& j, const CorrectnessCounts& c) {
  j = json{{"tp", c.tp()}, {"fp", c.fp()}, {"fn", c.fn()}};
}
inline void from_json(const json& j, CorrectnessCounts& c) {
  c = CorrectnessCounts(j.at("tp").get<std::int64_t>(), j.at("fp").get<std::int64_t>(),
                        j.at("fn").get<std::int64_t>());
}

inline void to_json(json& j, const FaithfulnessCounts& c) {
  j = json{{"passed", c.passed()}, {"failed", c.failed()}};
}
inline void from_json(const json& j, FaithfulnessCounts& c) {
  c = FaithfulnessCounts(j.at("passed").get<std::int64_t>(), j.at("failed").get<std::int64_t>());
}

inline void to_json(json& j, const Ratio& r) { j = json::array({r.num(), r.den()}); }
inline void from_json(const json& j, Ratio& r) {
  if (!j.is_array() || j.size() != 2) throw std::invalid_argument("ratio must be a [num, den] pair");
  r = Ratio(j[0].get<std::int64_t>(), j[1].get<std::int64_t>());
}

inline void to_json(json& j, const CorrectnessSample& s) {
  j = json{{"id", s.id},
           {"question", s.question},
           {"answer", s.answer},
           {"ground_truth", s.ground_truth},
           {"human_label", s.human_label}};
}
inline void from_json(const json& j, CorrectnessSample& s) {
  s.id = j.at("id").get<std::string>();
  s.question = j.at("question").get<std::string>();
  s.answer = j.at("answer").get<std::string>();
  s.ground_truth = j.at("ground_truth").get<std::string>();
  s.human_label = j.at("human_label").get<int>();
}

inline void to_json(json& j, const FaithfulnessSample& s) {
  j = json{{"id", s.id},
           {"question", s.question},
           {"context", s.context},
           {"good_answer", s.good_answer},
           {"poor_answer", s.poor_answer}};
}
inline void from_json(const json& j, FaithfulnessSample& s) {
  s.id = j.at("id").get<std::string>();
  s.question = j.at("question").get<std::string>();
  s.context = j.at("context").get<std::string>();
  s.good_answer = j.at("good_answer").get<std::string>();
  s.poor_answer = j.at("poor_answer").get<std::string>();
}

inline void to_json(json& j, const SampleScore& s) {
  j = json::object();
  j["sample_id"] = s.sample_id;
  j["score"] = s.score ? json(*s.score) : json(nullptr);
  j["score_fraction"] = s.fraction ? json(*s.fraction) : json(nullptr);
  if (const auto* c = std::get_if<CorrectnessCounts>(&s.counts)) {
    j["counts"] = *c;
  } else if (const auto* f = std::get_if<FaithfulnessCounts>(&s.counts)) {
    j["counts"] = *f;
  } else {
    j["counts"] = nullptr;
  }
  j["raw_judge_output"] = s.raw_judge_output;
  j["failure"] = s.failure ? json(*s.failure) : json(nullptr);
  if (!s.failure_detail.empty()) j["failure_detail"] = s.failure_detail;
}

inline void from_json(const json& j, SampleScore& s) {
  s = SampleScore{};
  s.sample_id = j.at("sample_id").get<std::string>();
  if (const auto& v = j.at("score"); !v.is_null()) s.score = v.get<double>();
  if (j.contains("score_fraction") && !j["score_fraction"].is_null()) s.fraction = j["score_fraction"].get<Ratio>();
  const auto& c = j.at("counts");
  if (c.is_object() && c.contains("tp")) {
    s.counts = c.get<CorrectnessCounts>();
  } else if (c.is_object() && c.contains("passed")) {
    s.counts = c.get<FaithfulnessCounts>();
  }
  s.raw_judge_output = j.value("raw_judge_output", std::string{});
  if (j.contains("failure") && !j["failure"].is_null()) s.failure = j["failure"].get<std::string>();
  s.failure_detail = j.value("failure_detail", std::string{});
}

}  // namespace ragjudge
