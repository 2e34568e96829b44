// SPDX-License-Identifier: Apache-2.0
// Runs the seven acceptance checks and prints one line per check.
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>

#include "fixtures.hpp"
#include "oracles.hpp"
#include "ragjudge/cli.hpp"
#include "ragjudge/ragjudge.hpp"

using namespace ragjudge;
namespace fs = std::filesystem;

namespace {

enum class Outcome { Pass, Fail, Skip };

struct Result {
  Outcome outcome;
  std::string detail;
};

Result pass(std::string d) { return {Outcome::Pass, std::move(d)}; }
Result fail(std::string d) { return {Outcome::Fail, std::move(d)}; }

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v, int digits = 3) {
  std::ostringstream s;
  s.precision(digits);
  s << std::fixed << v;
  return s.str();
}

Result metric_oracles() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> len(2, 12);
  std::bernoulli_distribution ties(0.5);
  double worst = 0;
  int done = 0;
  while (done < 1000) {
    const auto n = static_cast<std::size_t>(len(rng));
    const auto x = ties(rng) ? oracles::tie_heavy(rng, n) : oracles::continuous(rng, n);
    const auto y = ties(rng) ? oracles::tie_heavy(rng, n) : oracles::continuous(rng, n);
    if (oracles::constant(x) || oracles::constant(y)) continue;
    ++done;
    worst = std::max(worst, std::abs(metrics::spearman(x, y) - oracles::spearman(x, y)));
    worst = std::max(worst, std::abs(metrics::kendall(x, y) - oracles::kendall_tau_b(x, y)));
  }
  const double secs = seconds_since(t0);
  const auto d = "1000 vectors, max deviation " + std::to_string(worst) + ", " + fmt(secs) + " s";
  return worst <= 1e-9 && secs < 10 ? pass(d) : fail(d);
}

Result f1_auc_enumeration() {
  std::mt19937_64 rng(99);
  std::uniform_int_distribution<int> len(1, 20);
  std::uniform_int_distribution<int> tenth(0, 10);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::bernoulli_distribution coin(0.5);
  double worst = 0, max_mean = 0;
  for (int trial = 0; trial < 5000; ++trial) {
    const auto n = static_cast<std::size_t>(len(rng));
    std::vector<double> s(n);
    std::vector<int> h(n);
    for (std::size_t i = 0; i < n; ++i) {
      s[i] = coin(rng) ? tenth(rng) / 10.0 : u(rng);
      h[i] = coin(rng);
    }
    const double mean = metrics::f1_auc(s, h, metrics::AucNormalization::Mean).auc;
    const double paper = metrics::f1_auc(s, h, metrics::AucNormalization::Paper).auc;
    worst = std::max({worst, std::abs(mean - oracles::f1_auc(s, h, 11.0)), std::abs(paper - oracles::f1_auc(s, h, 10.0))});
    max_mean = std::max(max_mean, mean);
  }
  const auto d = "5000 sets, max deviation " + std::to_string(worst) + ", max mean-mode AUC " + fmt(max_mean, 4);
  return worst <= 1e-12 && max_mean <= 1.0 ? pass(d) : fail(d);
}

Result exemplar_parsing() {
  using verdicts::ParsingStrategy;
  for (auto s : {ParsingStrategy::Regex1, ParsingStrategy::Regex2}) {
    const auto name = std::string(verdicts::to_string(s));
    if (verdicts::parse_regex_correctness(fixtures::sun_classification(), s) != CorrectnessCounts(1, 1, 5)) {
      return fail("sun exemplar under " + name);
    }
    if (verdicts::parse_regex_correctness(fixtures::boiling_classification(), s) != CorrectnessCounts(1, 0, 1)) {
      return fail("boiling-point exemplar under " + name);
    }
    if (verdicts::parse_regex_faithfulness(fixtures::john_answer(), s) != FaithfulnessCounts(1, 3)) {
      return fail("John exemplar under " + name);
    }
  }
  return pass("sun {1,1,5}, boiling {1,0,1}, John {1,3} under r1 and r2");
}

Result automaton_correctness() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(5);
  const auto uniform = [](const automaton::SchemaAutomaton& fsa, const automaton::State&,
                          std::span<const automaton::TokenId>) {
    return std::vector<double>(fsa.vocabulary().size(), 0.0);
  };
  std::string counts;
  for (const auto& [sch, labels] : {std::pair{schema::correctness_schema(), std::vector<std::string>{"TP", "FP", "FN"}},
                                    std::pair{schema::faithfulness_schema(), std::vector<std::string>{"PASSED", "FAILED"}}}) {
    for (int n = 1; n <= 3; ++n) {
      const automaton::SchemaAutomaton fsa(sch, static_cast<std::size_t>(n));
      const auto docs = fixtures::accepted_documents(fsa);
      if (docs != oracles::label_assignment_documents(labels, n)) {
        return fail("accepted set differs from enumeration for " + labels[0] + " n=" + std::to_string(n));
      }
      counts += (counts.empty() ? "" : "/") + std::to_string(docs.size());
      for (const auto& s : fsa.reachable_states()) {
        if (!fsa.is_accepting(s) && fsa.valid_next_tokens(s).empty()) return fail("dead end found");
      }
      const auto target = schema::label_list_schema(labels, n);
      for (int walk = 0; walk < 200; ++walk) {
        const auto out = automaton::decode_constrained(fsa, uniform, rng);
        if (auto err = schema::validate(json::parse(out.text), target)) return fail("walk " + out.text + ": " + *err);
      }
    }
  }
  const double secs = seconds_since(t0);
  const auto d = "documents " + counts + ", no dead ends, walks valid, " + fmt(secs) + " s";
  return secs < 5 ? pass(d) : fail(d);
}

Result tie_algebra() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> len(1, 40);
  std::uniform_int_distribution<int> den(1, 6);
  using I = __int128;
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<std::pair<Ratio, Ratio>> pairs(static_cast<std::size_t>(len(rng)));
    for (auto& p : pairs) {
      const int d = den(rng);
      std::uniform_int_distribution<int> num(0, d);
      p = {Ratio(num(rng), d), Ratio(num(rng), d)};
    }
    const auto a = metrics::aggregate_pair_scores(pairs);
    const auto w = a.worst_ratio(), m = a.middle_ratio(), b = a.best_ratio(), t = a.tie_fraction();
    const bool ordered = w <= m && m <= b;
    const bool mid = I(2) * m.num() * w.den() * b.den() == I(m.den()) * (I(w.num()) * b.den() + I(b.num()) * w.den());
    const bool gap = I(t.num()) * w.den() * b.den() == I(t.den()) * (I(b.num()) * w.den() - I(w.num()) * b.den());
    if (!ordered || !mid || !gap) return fail("violated on trial " + std::to_string(trial));
  }
  return pass("10000 random pair lists");
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "ragjudge");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  return cli::run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

json report_without_timestamps(const fs::path& p) {
  auto r = json::parse(slurp(p));
  r["metadata"].erase("started_at");
  r["metadata"].erase("finished_at");
  return r;
}

std::vector<json> rows(const fs::path& p) {
  std::vector<json> out;
  std::istringstream in(slurp(p));
  for (std::string line; std::getline(in, line);) out.push_back(json::parse(line));
  return out;
}

Result end_to_end_replay() {
  const auto dir = fs::temp_directory_path() / "ragjudge_acceptance";
  fs::remove_all(dir);
  fs::create_directories(dir);
  fixtures::scenario_replay()->save(dir / "replay.jsonl");
  datasets::write_jsonl(dir / "correctness.jsonl", fixtures::samples_of(fixtures::correctness_scenario()));
  datasets::write_jsonl(dir / "faithfulness.jsonl", fixtures::samples_of(fixtures::faithfulness_scenario()));

  for (const char* run : {"a", "b"}) {
    for (const char* task : {"correctness", "faithfulness"}) {
      const int code = run_cli({std::string("eval-") + task, "--dataset", (dir / (std::string(task) + ".jsonl")).string(),
                                "--replay", (dir / "replay.jsonl").string(), "--out",
                                (dir / run / task).string()});
      if (code != 0) return fail(std::string("eval-") + task + " exited with " + std::to_string(code));
    }
  }
  for (const char* task : {"correctness", "faithfulness"}) {
    if (slurp(dir / "a" / task / "per_sample.jsonl") != slurp(dir / "b" / task / "per_sample.jsonl") ||
        slurp(dir / "a" / task / "histogram.csv") != slurp(dir / "b" / task / "histogram.csv") ||
        report_without_timestamps(dir / "a" / task / "report.json") !=
            report_without_timestamps(dir / "b" / task / "report.json")) {
      return fail(std::string(task) + " outputs differ between consecutive runs");
    }
  }

  const auto c = rows(dir / "a" / "correctness" / "per_sample.jsonl");
  const auto f = rows(dir / "a" / "faithfulness" / "per_sample.jsonl");
  const auto fraction = [](const json& row) { return row["score_fraction"]; };
  const bool correctness_ok = c.size() == 5 && c[0]["sample_id"] == "einstein" && fraction(c[0]) == json({1, 3}) &&
                              c[1]["score"] == 1.0 && fraction(c[2]) == json({1, 6}) && fraction(c[3]) == json({1, 2}) &&
                              c[4]["score"].is_null() && c[4]["failure"] == "zero_verdicts";
  const bool faithfulness_ok = f.size() == 6 && f[0]["score"] == 1.0 && f[1]["score"] == 0.25 &&
                               f[1]["pair_score"] == 1.0 && f[3]["pair_score"] == 0.5 && f[5]["pair_score"] == 0.0;
  fs::remove_all(dir);
  if (!correctness_ok) return fail("correctness scores differ from the scripted scenario");
  if (!faithfulness_ok) return fail("faithfulness scores differ from the scripted scenario");
  return pass("recall 1/3, 1, 1/6, 1/2, null; faithfulness 1.0 vs 0.25 -> 1, tie 0.5, loss 0; runs byte-identical");
}

Result dataset_reproduction() {
  const char* path = std::getenv("RAGJUDGE_NQ_DATASET");
  if (!path || !*path || !fs::exists(path)) {
    return {Outcome::Skip, "set RAGJUDGE_NQ_DATASET to a labelled NQ correctness JSONL file"};
  }
  pipeline::RunConfig cfg;
  cfg.task = pipeline::Task::Correctness;
  cfg.dataset = path;
  const auto r = pipeline::run_baselines(cfg);
  const double rho = 100 * r.aggregates["spearman"].get<double>();
  const double mean = 100 * r.aggregates["f1_auc_mean"].get<double>();
  const double paper = 100 * r.aggregates["f1_auc_paper"].get<double>();
  const bool rho_ok = std::abs(rho - 56.89) <= 1.0;
  const bool auc_ok = std::abs(mean - 88.78) <= 1.0 || std::abs(paper - 88.78) <= 1.0;
  const auto d = std::to_string(r.n_samples) + " samples, spearman " + fmt(rho, 2) + ", F1-AUC mean " + fmt(mean, 2) +
                 " / paper " + fmt(paper, 2);
  return rho_ok && auc_ok ? pass(d) : fail(d);
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Result()>>> checks{
      {"metric oracle equivalence", metric_oracles},
      {"F1-AUC enumeration", f1_auc_enumeration},
      {"exemplar verdict parsing", exemplar_parsing},
      {"schema automaton correctness", automaton_correctness},
      {"tie-score algebra", tie_algebra},
      {"end-to-end replay", end_to_end_replay},
      {"baseline dataset reproduction", dataset_reproduction},
  };
  int failures = 0;
  for (std::size_t i = 0; i < checks.size(); ++i) {
    Result r;
    try {
      r = checks[i].second();
    } catch (const std::exception& e) {
      r = fail(std::string("exception: ") + e.what());
    }
    const char* tag = r.outcome == Outcome::Pass ? "PASS" : r.outcome == Outcome::Fail ? "FAIL" : "SKIPPED";
    if (r.outcome == Outcome::Fail) ++failures;
    std::cout << "criterion " << (i + 1) << " " << tag << ": " << checks[i].first << " (" << r.detail << ")\n";
  }
  return failures == 0 ? 0 : 1;
}
