// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <set>
#include <mutex>
#include <string>
#include <string_view>
#include <vector>

#include "ragjudge/ragjudge.hpp"

namespace fixtures {

using namespace ragjudge;

// Slices the nth (0-based) worked example out of a shipped prompt body, so the
// exemplar texts stay byte-for-byte what the prompt shows the judge.
inline std::string exemplar(std::string_view body, std::string_view open, int nth) {
  std::size_t pos = 0;
  for (int i = 0; i <= nth; ++i) {
    pos = body.find(open, pos);
    if (pos == std::string_view::npos) throw std::logic_error("exemplar marker not found");
    pos += open.size();
  }
  const auto end = body.find("\"\n    }", pos);
  return std::string(body.substr(pos, end - pos));
}

inline std::string sun_classification() {
  return exemplar(prompts::defaults::kCorrectnessVerdict, "\"classification\": \"", 0);
}
inline std::string boiling_classification() {
  return exemplar(prompts::defaults::kCorrectnessVerdict, "\"classification\": \"", 1);
}
inline std::string han_solo_classification() {
  return exemplar(prompts::defaults::kCorrectnessVerdict, "\"classification\": \"", 2);
}
inline std::string john_answer() { return exemplar(prompts::defaults::kFaithfulnessVerdict, "\"answer\": \"", 0); }

// Transport answering through a callback; counts calls.
class ScriptedTransport : public backend::Transport {
 public:
  using Script = std::function<std::string(const backend::GenerationRequest&, int call)>;
  explicit ScriptedTransport(Script script) : script_(std::move(script)) {}

  std::string complete(const backend::GenerationRequest& r) override {
    int n;
    {
      std::lock_guard lock(mutex_);
      n = ++calls_;
      requests_.push_back(r);
    }
    return script_(r, n);
  }
  std::string describe() const override { return "scripted"; }

  int calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
  }
  std::vector<backend::GenerationRequest> requests() const {
    std::lock_guard lock(mutex_);
    return requests_;
  }

 private:
  Script script_;
  mutable std::mutex mutex_;
  int calls_{0};
  std::vector<backend::GenerationRequest> requests_;
};

struct CorrectnessScript {
  CorrectnessSample sample;
  std::string answer_statements;  // simplifier reply for the answer
  std::string truth_statements;   // simplifier reply for the ground truth
  std::string judge;              // judge reply
};

struct FaithfulnessScript {
  FaithfulnessSample sample;
  std::string good_statements;
  std::string good_judge;
  std::string poor_statements;
  std::string poor_judge;
};

inline void script_extraction(backend::ReplayTransport& replay, const prompts::TemplateSet& t, std::string_view question,
                              std::string_view text, std::string reply) {
  replay.add("", prompts::statement_extraction_prompt(t, question, text), std::move(reply));
}

inline void script(backend::ReplayTransport& replay, const prompts::TemplateSet& t, const CorrectnessScript& s) {
  script_extraction(replay, t, s.sample.question, s.sample.answer, s.answer_statements);
  script_extraction(replay, t, s.sample.question, s.sample.ground_truth, s.truth_statements);
  const auto a = prompts::parse_statement_list_or(s.answer_statements, s.sample.answer);
  const auto g = prompts::parse_statement_list_or(s.truth_statements, s.sample.ground_truth);
  replay.add("", prompts::correctness_verdict_prompt(t, s.sample.question, a, g), s.judge);
}

inline void script(backend::ReplayTransport& replay, const prompts::TemplateSet& t, const FaithfulnessScript& s) {
  const auto side = [&](const std::string& answer, const std::string& statements, const std::string& judge) {
    script_extraction(replay, t, s.sample.question, answer, statements);
    const auto parsed = prompts::parse_statement_list_or(statements, answer);
    replay.add("", prompts::faithfulness_verdict_prompt(t, s.sample.context, parsed), judge);
  };
  side(s.sample.good_answer, s.good_statements, s.good_judge);
  side(s.sample.poor_answer, s.poor_statements, s.poor_judge);
}

// Canned reply for the re-structuring request made on `judge` output.
inline void script_structuring(backend::ReplayTransport& replay, const prompts::TemplateSet& t, const std::string& judge,
                               verdicts::Metric metric, const json& reply) {
  const auto name = metric == verdicts::Metric::Correctness ? prompts::TemplateName::ConstrainedParseCorrectness
                                                            : prompts::TemplateName::ConstrainedParseFaithfulness;
  const auto block = verdicts::classified_statements(judge).prompt_block;
  replay.add("", prompts::render(t.get(name), {{"statements", block}}), reply.dump());
}

// Every document the automaton accepts, by exhaustive DFS over allowed tokens.
inline std::set<std::string> accepted_documents(const automaton::SchemaAutomaton& fsa) {
  std::set<std::string> docs;
  std::vector<automaton::TokenId> prefix;
  std::function<void(const automaton::State&)> walk = [&](const automaton::State& s) {
    if (fsa.is_accepting(s)) {
      docs.insert(fsa.detokenize(prefix));
      return;
    }
    for (auto t : fsa.valid_next_tokens(s)) {
      prefix.push_back(t);
      walk(fsa.next(s, t));
      prefix.pop_back();
    }
  };
  walk(fsa.start());
  return docs;
}

// ---------------- the demo scenario ----------------

inline CorrectnessScript einstein() {
  return {{"einstein", "Where and when was Albert Einstein born?", "Albert Einstein was born in Barcelona Spain, 1879.",
           "Albert Einstein was born in Ulm, Germany in 1879.", 0},
          "- Albert Einstein was born in Spain.\n- Albert Einstein was born in Barcelona.\n"
          "- Albert Einstein was born in 1879.",
          "- Albert Einstein was born in Ulm.\n- Albert Einstein was born in Germany.\n"
          "- Albert Einstein was born in 1879.",
          "- Albert Einstein was born in 1879. The ground truth gives the same year. VERDICT: TP\n"
          "- Albert Einstein was born in Spain. The ground truth places his birth in Germany. VERDICT: FP\n"
          "- Albert Einstein was born in Barcelona. The ground truth names Ulm. VERDICT: FP\n"
          "- Albert Einstein was born in Ulm. The answer does not mention Ulm. VERDICT: FN\n"
          "- Albert Einstein was born in Germany. The answer does not mention Germany. VERDICT: FN"};
}

inline CorrectnessScript identity() {
  const std::string text = "Harrison Ford plays Han Solo in the original Star Wars.";
  return {{"identity", "Which actor is playing Han Solo in the original Star Wars?", text, text, 1},
          "- Harrison Ford plays Han Solo in the original Star Wars.",
          "- Harrison Ford plays Han Solo in the original Star Wars.",
          "- Harrison Ford plays Han Solo in the original Star Wars. Both lists say the same. VERDICT: TP"};
}

inline CorrectnessScript sun() {
  return {{"sun", "What powers the sun and what is its primary function?",
           "The sun is powered by nuclear fission, similar to nuclear reactors on Earth. The primary function of the "
           "sun is to provide light to the solar system.",
           "The sun is powered by nuclear fusion, where hydrogen atoms fuse to form helium. This fusion process in the "
           "sun's core releases a tremendous amount of energy. The energy from the sun provides heat and light, which "
           "are essential for life on Earth. The sun's light plays a critical role in Earth's climate system. "
           "Sunlight helps to drive the weather and ocean currents.",
           0},
          "- The sun is powered by nuclear fission, similar to nuclear reactors on Earth.\n"
          "- The primary function of the sun is to provide light to the solar system.",
          "- The sun is powered by nuclear fusion, where hydrogen atoms fuse to form helium.\n"
          "- This fusion process in the sun's core releases a tremendous amount of energy.\n"
          "- The energy from the sun provides heat and light, which are essential for life on Earth.\n"
          "- The sun's light plays a critical role in Earth's climate system.\n"
          "- Sunlight helps to drive the weather and ocean currents.",
          sun_classification()};
}

inline CorrectnessScript boiling() {
  return {{"boiling", "What is the boiling point of water?",
           "The boiling point of water is 100 degrees Celsius at sea level",
           "The boiling point of water is 100 degrees Celsius (212 degrees Fahrenheit) at sea level. The boiling "
           "point of water can change with altitude.",
           1},
          "- The boiling point of water is 100 degrees Celsius at sea level",
          "- The boiling point of water is 100 degrees Celsius (212 degrees Fahrenheit) at sea level.\n"
          "- The boiling point of water can change with altitude.",
          boiling_classification()};
}

inline CorrectnessScript prose() {
  return {{"prose", "Who wrote Hamlet?", "Hamlet was written by William Shakespeare.",
           "William Shakespeare wrote Hamlet.", 1},
          "- Hamlet was written by William Shakespeare.",
          "- William Shakespeare wrote Hamlet.",
          "Both texts agree that Shakespeare is the author, so the answer looks right to me."};
}

inline std::vector<CorrectnessScript> correctness_scenario() { return {einstein(), identity(), sun(), boiling(), prose()}; }

inline const char* kJohnContext =
    "John is a student at XYZ University. He is pursuing a degree in Computer Science. He is enrolled in several "
    "courses this semester, including Data Structures, Algorithms, and Database Management. John is a diligent "
    "student and spends a significant amount of time studying and completing assignments. He often stays late in "
    "the library to work on his projects.";

inline FaithfulnessScript john() {
  return {{"john", "What do we know about John?", kJohnContext,
           "John studies Computer Science at XYZ University. He takes Data Structures, Algorithms and Database "
           "Management. He is a diligent student who often stays late in the library.",
           "John is majoring in Biology. He is taking a course on Artificial Intelligence. He is a dedicated student. "
           "He has a part-time job."},
          "- John studies Computer Science at XYZ University.\n"
          "- John takes Data Structures, Algorithms and Database Management.\n"
          "- John is a diligent student.\n"
          "- John often stays late in the library.",
          "- John studies Computer Science at XYZ University. The context says so. VERDICT: PASSED\n"
          "- John takes Data Structures, Algorithms and Database Management. The courses are listed. VERDICT: PASSED\n"
          "- John is a diligent student. Stated directly. VERDICT: PASSED\n"
          "- John often stays late in the library. Stated directly. VERDICT: PASSED",
          "- John is majoring in Biology.,\n- John is taking a course on Artificial Intelligence.,\n"
          "- John is a dedicated student.,\n- John has a part-time job.",
          john_answer()};
}

inline FaithfulnessScript photosynthesis_tie() {
  const char* context =
      "Photosynthesis is a process used by plants, algae, and certain bacteria to convert light energy into chemical "
      "energy.";
  return {{"photosynthesis", "What is photosynthesis?", context,
           "Photosynthesis converts light energy into chemical energy.",
           "Photosynthesis is used by plants and algae."},
          "- Photosynthesis converts light energy into chemical energy.",
          "- Photosynthesis converts light energy into chemical energy. Stated in the context. VERDICT: PASSED",
          "- Photosynthesis is used by plants and algae.",
          "- Photosynthesis is used by plants and algae. Stated in the context. VERDICT: PASSED"};
}

inline FaithfulnessScript reversed() {
  const char* context = "The Eiffel Tower is in Paris. It was completed in 1889.";
  return {{"eiffel", "Where is the Eiffel Tower?", context, "The Eiffel Tower is in Rome. It was completed in 1889.",
           "The Eiffel Tower is in Paris."},
          "- The Eiffel Tower is in Rome.\n- The Eiffel Tower was completed in 1889.",
          "- The Eiffel Tower is in Rome. The context says Paris. VERDICT: FAILED\n"
          "- The Eiffel Tower was completed in 1889. Stated. VERDICT: PASSED",
          "- The Eiffel Tower is in Paris.",
          "- The Eiffel Tower is in Paris. Stated. VERDICT: PASSED"};
}

inline std::vector<FaithfulnessScript> faithfulness_scenario() { return {john(), photosynthesis_tie(), reversed()}; }

// Replay file content covering both scenarios under the default templates.
inline std::shared_ptr<backend::ReplayTransport> scenario_replay() {
  auto replay = std::make_shared<backend::ReplayTransport>();
  const prompts::TemplateSet t;
  for (const auto& s : correctness_scenario()) script(*replay, t, s);
  for (const auto& s : faithfulness_scenario()) script(*replay, t, s);
  return replay;
}

template <typename Script>
std::vector<decltype(Script::sample)> samples_of(const std::vector<Script>& scripts) {
  std::vector<decltype(Script::sample)> out;
  for (const auto& s : scripts) out.push_back(s.sample);
  return out;
}

}  // namespace fixtures
