// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "ragjudge/backend.hpp"
#include "ragjudge/core_types.hpp"
#include "ragjudge/datasets.hpp"
#include "ragjudge/errors.hpp"
#include "ragjudge/http_transport.hpp"
#include "ragjudge/metrics.hpp"
#include "ragjudge/prompting.hpp"
#include "ragjudge/verdict_parsing.hpp"

namespace ragjudge::pipeline {

enum class Task { Correctness, Faithfulness };
enum class CorrectnessScore { Recall, F1 };

inline std::string_view to_string(Task t) { return t == Task::Correctness ? "correctness" : "faithfulness"; }
inline std::string_view to_string(CorrectnessScore s) { return s == CorrectnessScore::Recall ? "recall" : "f1"; }

inline CorrectnessScore parse_correctness_score(std::string_view s) {
  if (s == "recall") return CorrectnessScore::Recall;
  if (s == "f1") return CorrectnessScore::F1;
  throw ConfigError("unknown correctness score '" + std::string(s) + "' (expected recall or f1)");
}

inline metrics::AucNormalization parse_auc_normalization(std::string_view s) {
  if (s == "mean") return metrics::AucNormalization::Mean;
  if (s == "paper") return metrics::AucNormalization::Paper;
  throw ConfigError("unknown AUC normalization '" + std::string(s) + "' (expected mean or paper)");
}

struct RunConfig {
  Task task{Task::Correctness};
  verdicts::ParsingStrategy strategy{verdicts::ParsingStrategy::Regex2};
  CorrectnessScore correctness_score{CorrectnessScore::Recall};
  metrics::AucNormalization auc_normalization{metrics::AucNormalization::Mean};

  // backend
  std::string endpoint{"http://127.0.0.1:8080/v1"};
  std::string api_key;
  std::string model_id{"default"};
  double temperature{backend::kDefaultTemperature};
  int max_tokens{backend::kDefaultMaxTokens};
  int concurrency{4};
  int max_retries{backend::kDefaultRetries};
  int repair_attempts{backend::kDefaultRepairs};
  std::chrono::milliseconds backoff_base{500};
  bool native_schema{false};
  std::optional<std::filesystem::path> cache_dir;
  std::optional<std::filesystem::path> replay_file;
  std::optional<std::filesystem::path> template_dir;

  std::filesystem::path dataset;
  std::filesystem::path output_dir{"ragjudge-out"};
  std::optional<std::int64_t> seed;
  metrics::TokenizerOptions tokenizer;

  void validate() const {
    if (concurrency < 1) throw ConfigError("concurrency must be >= 1");
    if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
    if (max_tokens < 1) throw ConfigError("max_tokens must be >= 1");
    if (max_retries < 0 || repair_attempts < 0) throw ConfigError("retry and repair limits must be >= 0");
  }

  // Everything that can change results. Output location, secrets and
  // parallelism are left out.
  json result_relevant() const {
    return json{{"task", to_string(task)},
                {"strategy", verdicts::to_string(strategy)},
                {"correctness_score", to_string(correctness_score)},
                {"auc_normalization", metrics::to_string(auc_normalization)},
                {"model_id", model_id},
                {"temperature", temperature},
                {"max_tokens", max_tokens},
                {"repair_attempts", repair_attempts},
                {"native_schema", native_schema},
                {"seed", seed ? json(*seed) : json(nullptr)},
                {"tokenizer",
                 {{"lowercase", tokenizer.lowercase},
                  {"strip_punctuation", tokenizer.strip_punctuation},
                  {"drop_articles", tokenizer.drop_articles}}}};
  }

  std::string digest() const { return sha256_hex(result_relevant().dump()); }
};

// ---------------- per-sample evaluation ----------------

struct CorrectnessRecord {
  SampleScore score;
  int human_label{0};
};

struct FaithfulnessRecord {
  SampleScore good;
  SampleScore poor;
  std::optional<double> pair_score;  // null when either side is null
};

// Runs the simplify / judge / parse chain for one sample against a client.
class Evaluator {
 public:
  Evaluator(backend::Client& client, prompts::TemplateSet templates, RunConfig config)
      : client_(client), templates_(std::move(templates)), config_(std::move(config)) {}

  backend::GenerationRequest request(std::string user_text) const {
    backend::GenerationRequest r;
    r.model_id = config_.model_id;
    r.user_text = std::move(user_text);
    r.temperature = config_.temperature;
    r.max_tokens = config_.max_tokens;
    r.seed = config_.seed;
    return r;
  }

  // Simplifier: one extraction call per distinct text (repeats hit the cache).
  std::vector<Statement> simplify(std::string_view question, std::string_view text) {
    const auto prompt = prompts::statement_extraction_prompt(templates_, question, text);
    const auto reply = client_.generate(request(prompt));
    return prompts::parse_statement_list_or(reply.text, text);
  }

  // Parser stage for correctness. Throws the parse-level errors.
  CorrectnessCounts parse_correctness(const std::string& judged) {
    using verdicts::ParsingStrategy;
    if (config_.strategy != ParsingStrategy::Constrained) {
      return verdicts::parse_regex_correctness(judged, config_.strategy);
    }
    const auto classified = verdicts::classified_statements(judged);
    if (classified.count() == 0) throw ZeroVerdicts("judge output has no statement lines");
    const auto outcome = verdicts::constrained_parse(judged, verdicts::Metric::Correctness, classified.count(),
                                                     client_, templates_, request({}));
    return std::get<CorrectnessCounts>(outcome.counts);
  }

  FaithfulnessCounts parse_faithfulness(const std::string& judged) {
    using verdicts::ParsingStrategy;
    if (config_.strategy != ParsingStrategy::Constrained) {
      return verdicts::parse_regex_faithfulness(judged, config_.strategy);
    }
    const auto classified = verdicts::classified_statements(judged);
    if (classified.count() == 0) throw ZeroVerdicts("judge output has no statement lines");
    const auto outcome = verdicts::constrained_parse(judged, verdicts::Metric::Faithfulness, classified.count(),
                                                     client_, templates_, request({}));
    return std::get<FaithfulnessCounts>(outcome.counts);
  }

  // Backend failures propagate; parse failures yield a null score.
  SampleScore evaluate_correctness_sample(const CorrectnessSample& sample) {
    const auto answer_statements = simplify(sample.question, sample.answer);
    const auto truth_statements = simplify(sample.question, sample.ground_truth);
    const auto prompt =
        prompts::correctness_verdict_prompt(templates_, sample.question, answer_statements, truth_statements);
    const auto judged = client_.generate(request(prompt)).text;

    CorrectnessCounts counts;
    try {
      counts = parse_correctness(judged);
    } catch (const Error& e) {
      if (!is_parse_failure(e)) throw;
      return SampleScore::null(sample.id, failure_reason(e), e.what(), judged);
    }
    try {
      const auto ratio = config_.correctness_score == CorrectnessScore::Recall ? metrics::recall_ratio(counts)
                                                                               : metrics::f1_ratio(counts);
      return SampleScore::from_ratio(sample.id, ratio, counts, judged);
    } catch (const UndefinedScore& e) {
      return SampleScore::null(sample.id, "undefined_score", e.what(), judged, counts);
    }
  }

  SampleScore evaluate_faithfulness_answer(const std::string& id, const FaithfulnessSample& sample,
                                           const std::string& answer) {
    const auto statements = simplify(sample.question, answer);
    const auto prompt = prompts::faithfulness_verdict_prompt(templates_, sample.context, statements);
    const auto judged = client_.generate(request(prompt)).text;

    FaithfulnessCounts counts;
    try {
      counts = parse_faithfulness(judged);
    } catch (const Error& e) {
      if (!is_parse_failure(e)) throw;
      return SampleScore::null(id, failure_reason(e), e.what(), judged);
    }
    try {
      return SampleScore::from_ratio(id, metrics::precision_ratio(counts), counts, judged);
    } catch (const UndefinedScore& e) {
      return SampleScore::null(id, "undefined_score", e.what(), judged, counts);
    }
  }

  FaithfulnessRecord evaluate_faithfulness_pair(const FaithfulnessSample& sample) {
    FaithfulnessRecord rec;
    rec.good = evaluate_faithfulness_answer(sample.id, sample, sample.good_answer);
    rec.poor = evaluate_faithfulness_answer(sample.id, sample, sample.poor_answer);
    if (rec.good.fraction && rec.poor.fraction) rec.pair_score = metrics::pair_score(*rec.good.fraction, *rec.poor.fraction);
    return rec;
  }

  static bool is_parse_failure(const Error& e) {
    return dynamic_cast<const ZeroVerdicts*>(&e) || dynamic_cast<const IndexCoverageError*>(&e) ||
           dynamic_cast<const SchemaViolation*>(&e) || dynamic_cast<const UndefinedScore*>(&e);
  }

  static std::string failure_reason(const Error& e) {
    if (dynamic_cast<const ZeroVerdicts*>(&e)) return "zero_verdicts";
    if (dynamic_cast<const IndexCoverageError*>(&e)) return "index_coverage";
    if (dynamic_cast<const SchemaViolation*>(&e)) return "schema_violation";
    if (dynamic_cast<const UndefinedScore*>(&e)) return "undefined_score";
    if (dynamic_cast<const NetworkError*>(&e) || dynamic_cast<const BackendError*>(&e) ||
        dynamic_cast<const EmptyCompletion*>(&e)) {
      return "backend_error";
    }
    return "error";
  }

 private:
  backend::Client& client_;
  prompts::TemplateSet templates_;
  RunConfig config_;
};

// ---------------- report ----------------

inline constexpr std::size_t kHistogramBins = 20;

struct Histogram {
  std::vector<std::string> population_names;
  std::vector<std::vector<std::int64_t>> counts;  // [population][bin]

  static std::size_t bin_of(double score) {
    const auto b = static_cast<std::size_t>(std::floor(score * static_cast<double>(kHistogramBins)));
    return std::min(b, kHistogramBins - 1);
  }

  static double edge(std::size_t i) { return static_cast<double>(i) / static_cast<double>(kHistogramBins); }
};

struct RunReport {
  Task task{Task::Correctness};
  std::string evaluator{"llm"};
  std::vector<CorrectnessRecord> correctness;
  std::vector<FaithfulnessRecord> faithfulness;
  json aggregates;
  double parse_failure_rate{0.0};
  std::size_t n_samples{0};
  std::size_t n_scored{0};
  Histogram histogram;
  json diagnostics = json::object();
  json metadata = json::object();
};

inline json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

inline json correctness_aggregates(const std::vector<CorrectnessRecord>& records,
                                   metrics::AucNormalization primary) {
  std::vector<double> scores;
  std::vector<int> labels;
  for (const auto& r : records) {
    if (r.score.score) {
      scores.push_back(*r.score.score);
      labels.push_back(r.human_label);
    }
  }
  json agg = {{"n_scored", scores.size()}, {"auc_normalization", metrics::to_string(primary)}};
  if (scores.empty()) {
    for (const char* k : {"f1_auc", "f1_auc_mean", "f1_auc_paper", "spearman", "kendall"}) agg[k] = nullptr;
    agg["thresholds"] = json::array();
    agg["f1_values"] = json::array();
    return agg;
  }
  const auto mean_curve = metrics::f1_auc(scores, labels, metrics::AucNormalization::Mean);
  const auto paper_curve = metrics::f1_auc(scores, labels, metrics::AucNormalization::Paper);
  agg["f1_auc_mean"] = mean_curve.auc;
  agg["f1_auc_paper"] = paper_curve.auc;
  agg["f1_auc"] = primary == metrics::AucNormalization::Mean ? mean_curve.auc : paper_curve.auc;
  agg["thresholds"] = mean_curve.thresholds;
  agg["f1_values"] = mean_curve.f1_values;

  const std::vector<double> human(labels.begin(), labels.end());
  const auto correlation = [&](auto fn) -> json {
    try {
      return fn(std::span<const double>(scores), std::span<const double>(human));
    } catch (const DegenerateInput&) {
      return nullptr;
    }
  };
  agg["spearman"] = correlation([](auto x, auto y) { return metrics::spearman(x, y); });
  agg["kendall"] = correlation([](auto x, auto y) { return metrics::kendall(x, y); });
  return agg;
}

inline json faithfulness_aggregates(const std::vector<FaithfulnessRecord>& records) {
  std::vector<std::pair<Ratio, Ratio>> pairs;
  for (const auto& r : records) {
    if (r.good.fraction && r.poor.fraction) pairs.emplace_back(*r.good.fraction, *r.poor.fraction);
  }
  json agg = {{"n_pairs", records.size()}, {"n_scored_pairs", pairs.size()}};
  if (pairs.empty()) {
    for (const char* k : {"worst", "middle", "best", "wins", "ties"}) agg[k] = nullptr;
    return agg;
  }
  const auto a = metrics::aggregate_pair_scores(pairs);
  agg["worst"] = a.worst;
  agg["middle"] = a.middle;
  agg["best"] = a.best;
  agg["wins"] = a.wins;
  agg["ties"] = a.ties;
  return agg;
}

inline Histogram correctness_histogram(const std::vector<CorrectnessRecord>& records) {
  Histogram h{{"label_0", "label_1"}, std::vector<std::vector<std::int64_t>>(2, std::vector<std::int64_t>(kHistogramBins))};
  for (const auto& r : records) {
    if (r.score.score) ++h.counts[r.human_label == 1 ? 1 : 0][Histogram::bin_of(*r.score.score)];
  }
  return h;
}

inline Histogram faithfulness_histogram(const std::vector<FaithfulnessRecord>& records) {
  Histogram h{{"good", "poor"}, std::vector<std::vector<std::int64_t>>(2, std::vector<std::int64_t>(kHistogramBins))};
  for (const auto& r : records) {
    if (r.good.score) ++h.counts[0][Histogram::bin_of(*r.good.score)];
    if (r.poor.score) ++h.counts[1][Histogram::bin_of(*r.poor.score)];
  }
  return h;
}

inline json failure_diagnostics(const RunReport& report) {
  json failures = json::array();
  const auto note = [&](const SampleScore& s, const char* role) {
    if (!s.failure) return;
    json f = {{"sample_id", s.sample_id}, {"reason", *s.failure}, {"detail", s.failure_detail}};
    if (role) f["role"] = role;
    failures.push_back(std::move(f));
  };
  for (const auto& r : report.correctness) note(r.score, nullptr);
  for (const auto& r : report.faithfulness) {
    note(r.good, "good");
    note(r.poor, "poor");
  }
  return failures;
}

// Fills every derived field of `report` from its per-sample records.
inline void finalize(RunReport& report, metrics::AucNormalization primary) {
  if (report.task == Task::Correctness) {
    report.n_samples = report.correctness.size();
    report.n_scored = static_cast<std::size_t>(std::count_if(report.correctness.begin(), report.correctness.end(),
                                                             [](const auto& r) { return r.score.scored(); }));
    report.aggregates = correctness_aggregates(report.correctness, primary);
    report.histogram = correctness_histogram(report.correctness);
  } else {
    report.n_samples = report.faithfulness.size();
    report.n_scored = static_cast<std::size_t>(std::count_if(report.faithfulness.begin(), report.faithfulness.end(),
                                                             [](const auto& r) { return r.pair_score.has_value(); }));
    report.aggregates = faithfulness_aggregates(report.faithfulness);
    report.histogram = faithfulness_histogram(report.faithfulness);
  }
  report.parse_failure_rate =
      report.n_samples == 0 ? 0.0
                            : static_cast<double>(report.n_samples - report.n_scored) / static_cast<double>(report.n_samples);
  report.diagnostics["failures"] = failure_diagnostics(report);
}

// ---------------- serialization ----------------

inline json per_sample_record(const SampleScore& s) { return json(s); }

inline std::vector<json> per_sample_records(const RunReport& report) {
  std::vector<json> rows;
  for (const auto& r : report.correctness) {
    json row = r.score;
    row["human_label"] = r.human_label;
    rows.push_back(std::move(row));
  }
  for (const auto& r : report.faithfulness) {
    for (const auto* side : {&r.good, &r.poor}) {
      json row = *side;
      row["role"] = side == &r.good ? "good" : "poor";
      row["pair_score"] = nullable(r.pair_score);
      rows.push_back(std::move(row));
    }
  }
  return rows;
}

inline json report_json(const RunReport& report) {
  json edges = json::array();
  for (std::size_t i = 0; i <= kHistogramBins; ++i) edges.push_back(Histogram::edge(i));
  json populations = json::object();
  for (std::size_t p = 0; p < report.histogram.population_names.size(); ++p) {
    populations[report.histogram.population_names[p]] = report.histogram.counts[p];
  }
  return json{{"task", to_string(report.task)},
              {"evaluator", report.evaluator},
              {"n_samples", report.n_samples},
              {"n_scored", report.n_scored},
              {"parse_failure_rate", report.parse_failure_rate},
              {"aggregates", report.aggregates},
              {"histogram", {{"bins", kHistogramBins}, {"edges", edges}, {"populations", populations}}},
              {"diagnostics", report.diagnostics},
              {"metadata", report.metadata}};
}

inline std::string histogram_csv(const Histogram& h) {
  std::string out = "bin_start,bin_end";
  for (const auto& name : h.population_names) out += "," + name;
  out += '\n';
  for (std::size_t b = 0; b < kHistogramBins; ++b) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.2f,%.2f", Histogram::edge(b), Histogram::edge(b + 1));
    out += buf;
    for (const auto& pop : h.counts) out += "," + std::to_string(pop[b]);
    out += '\n';
  }
  return out;
}

// Writes per_sample.jsonl, report.json and histogram.csv into `dir`.
inline void write_outputs(const RunReport& report, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  {
    std::ofstream out(dir / "per_sample.jsonl", std::ios::binary | std::ios::trunc);
    for (const auto& row : per_sample_records(report)) out << row.dump() << '\n';
  }
  {
    std::ofstream out(dir / "report.json", std::ios::binary | std::ios::trunc);
    out << report_json(report).dump(2) << '\n';
  }
  {
    std::ofstream out(dir / "histogram.csv", std::ios::binary | std::ios::trunc);
    out << histogram_csv(report.histogram);
  }
}

// Rebuilds a report from a per_sample.jsonl file alone.
inline RunReport report_from_per_sample(const std::filesystem::path& file, metrics::AucNormalization primary) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FileNotFound("per-sample file not found: " + file.string());
  RunReport report;
  std::vector<json> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    auto row = json::parse(line, nullptr, false);
    if (row.is_discarded()) throw DatasetError(file.string() + " line " + std::to_string(line_no) + ": not JSON");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw DatasetError("per-sample file is empty: " + file.string());

  report.task = rows.front().contains("role") ? Task::Faithfulness : Task::Correctness;
  if (report.task == Task::Correctness) {
    for (const auto& row : rows) report.correctness.push_back({row.get<SampleScore>(), row.at("human_label").get<int>()});
  } else {
    if (rows.size() % 2 != 0) throw DatasetError("faithfulness per-sample file must hold good/poor pairs");
    for (std::size_t i = 0; i < rows.size(); i += 2) {
      if (rows[i].at("role") != "good" || rows[i + 1].at("role") != "poor" ||
          rows[i].at("sample_id") != rows[i + 1].at("sample_id")) {
        throw DatasetError("faithfulness rows must alternate good/poor for the same sample");
      }
      FaithfulnessRecord rec{rows[i].get<SampleScore>(), rows[i + 1].get<SampleScore>(), std::nullopt};
      if (rec.good.fraction && rec.poor.fraction) rec.pair_score = metrics::pair_score(*rec.good.fraction, *rec.poor.fraction);
      report.faithfulness.push_back(std::move(rec));
    }
  }
  report.evaluator = "recomputed";
  finalize(report, primary);
  report.metadata = {{"source", file.string()}};
  return report;
}

// ---------------- orchestration ----------------

// Runs `work(i)` for i in [0, n) on up to `workers` threads. The first
// exception escaping `work` is rethrown after all threads finish.
template <typename Work>
void parallel_for(std::size_t n, int workers, Work work) {
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto loop = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      try {
        work(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const auto count = std::min<std::size_t>(static_cast<std::size_t>(std::max(1, workers)), std::max<std::size_t>(n, 1));
  {
    std::vector<std::jthread> pool;
    for (std::size_t t = 1; t < count; ++t) pool.emplace_back(loop);
    loop();
  }
  if (failure) std::rethrow_exception(failure);
}

inline std::shared_ptr<backend::Transport> make_transport(const RunConfig& config) {
  if (config.replay_file) return backend::ReplayTransport::load(*config.replay_file);
  return std::make_shared<backend::HttpChatTransport>(
      backend::HttpConfig{config.endpoint, config.api_key, std::chrono::seconds(600), config.native_schema});
}

inline std::unique_ptr<backend::Client> make_client(const RunConfig& config,
                                                    std::shared_ptr<backend::Transport> transport) {
  backend::ClientConfig cc;
  cc.max_retries = config.max_retries;
  cc.repair_attempts = config.repair_attempts;
  cc.max_in_flight = config.concurrency;
  cc.backoff_base = config.backoff_base;
  cc.cache_dir = config.cache_dir;
  return std::make_unique<backend::Client>(std::move(transport), cc);
}

inline prompts::TemplateSet load_templates(const RunConfig& config) {
  return config.template_dir ? prompts::TemplateSet::load(*config.template_dir) : prompts::TemplateSet{};
}

inline json base_metadata(const RunConfig& config, std::string_view source_tag) {
  return json{{"config_digest", config.digest()},
              {"config", config.result_relevant()},
              {"dataset", std::string(source_tag)},
              {"model_id", config.model_id},
              {"started_at", backend::ResponseCache::timestamp_utc()}};
}

template <typename Sample>
void require_samples(const std::vector<Sample>& samples) {
  if (samples.empty()) throw DatasetError("dataset has no samples");
}

// LLM-judge run over the configured dataset using `client`.
inline RunReport run(const RunConfig& config, backend::Client& client) {
  config.validate();
  Evaluator evaluator(client, load_templates(config), config);
  RunReport report;
  report.task = config.task;
  report.evaluator = "llm";

  const auto backend_failure = [](const std::string& id, const Error& e) {
    return SampleScore::null(id, Evaluator::failure_reason(e), e.what());
  };

  if (config.task == Task::Correctness) {
    const auto ds = datasets::load_correctness(config.dataset);
    require_samples(ds.samples);
    report.metadata = base_metadata(config, ds.source_tag);
    report.metadata["warnings"] = ds.warnings;
    report.correctness.resize(ds.samples.size());
    parallel_for(ds.samples.size(), config.concurrency, [&](std::size_t i) {
      const auto& sample = ds.samples[i];
      try {
        report.correctness[i] = {evaluator.evaluate_correctness_sample(sample), sample.human_label};
      } catch (const Error& e) {
        report.correctness[i] = {backend_failure(sample.id, e), sample.human_label};
      }
    });
  } else {
    const auto ds = datasets::load_faithfulness(config.dataset);
    require_samples(ds.samples);
    report.metadata = base_metadata(config, ds.source_tag);
    report.metadata["warnings"] = ds.warnings;
    report.faithfulness.resize(ds.samples.size());
    parallel_for(ds.samples.size(), config.concurrency, [&](std::size_t i) {
      const auto& sample = ds.samples[i];
      FaithfulnessRecord rec;
      try {
        rec.good = evaluator.evaluate_faithfulness_answer(sample.id, sample, sample.good_answer);
      } catch (const Error& e) {
        rec.good = backend_failure(sample.id, e);
      }
      try {
        rec.poor = evaluator.evaluate_faithfulness_answer(sample.id, sample, sample.poor_answer);
      } catch (const Error& e) {
        rec.poor = backend_failure(sample.id, e);
      }
      if (rec.good.fraction && rec.poor.fraction) {
        rec.pair_score = metrics::pair_score(*rec.good.fraction, *rec.poor.fraction);
      }
      report.faithfulness[i] = std::move(rec);
    });
  }

  finalize(report, config.auc_normalization);
  if (config.strategy == verdicts::ParsingStrategy::Regex2) {
    const auto metric =
        config.task == Task::Correctness ? verdicts::Metric::Correctness : verdicts::Metric::Faithfulness;
    std::size_t multi = 0;
    for (const auto& row : per_sample_records(report)) {
      multi += verdicts::multi_label_lines(row["raw_judge_output"].get<std::string>(), metric,
                                           verdicts::ParsingStrategy::Regex2);
    }
    report.diagnostics["multi_label_lines"] = multi;
  }
  report.metadata["backend"] = client.transport().describe();
  report.metadata["finished_at"] = backend::ResponseCache::timestamp_utc();
  return report;
}

inline RunReport run(const RunConfig& config) {
  config.validate();
  auto client = make_client(config, make_transport(config));
  return run(config, *client);
}

// Deterministic token-overlap baselines: bag-of-tokens recall for
// correctness, K-precision against the context for faithfulness.
inline RunReport run_baselines(const RunConfig& config) {
  config.validate();
  RunReport report;
  report.task = config.task;
  const auto scored = [](const std::string& id, auto compute) {
    try {
      return SampleScore::from_ratio(id, compute(), std::monostate{});
    } catch (const UndefinedScore& e) {
      return SampleScore::null(id, "undefined_score", e.what());
    }
  };

  if (config.task == Task::Correctness) {
    report.evaluator = "bot_recall";
    const auto ds = datasets::load_correctness(config.dataset);
    require_samples(ds.samples);
    report.metadata = base_metadata(config, ds.source_tag);
    report.metadata["warnings"] = ds.warnings;
    for (const auto& s : ds.samples) {
      report.correctness.push_back(
          {scored(s.id, [&] { return metrics::bot_recall_ratio(s.answer, s.ground_truth, config.tokenizer); }),
           s.human_label});
    }
  } else {
    report.evaluator = "k_precision";
    const auto ds = datasets::load_faithfulness(config.dataset);
    require_samples(ds.samples);
    report.metadata = base_metadata(config, ds.source_tag);
    report.metadata["warnings"] = ds.warnings;
    for (const auto& s : ds.samples) {
      FaithfulnessRecord rec;
      rec.good = scored(s.id, [&] { return metrics::k_precision_ratio(s.good_answer, s.context, config.tokenizer); });
      rec.poor = scored(s.id, [&] { return metrics::k_precision_ratio(s.poor_answer, s.context, config.tokenizer); });
      if (rec.good.fraction && rec.poor.fraction) {
        rec.pair_score = metrics::pair_score(*rec.good.fraction, *rec.poor.fraction);
      }
      report.faithfulness.push_back(std::move(rec));
    }
  }
  finalize(report, config.auc_normalization);
  report.metadata["backend"] = "none";
  report.metadata["finished_at"] = backend::ResponseCache::timestamp_utc();
  return report;
}

}  // namespace ragjudge::pipeline
