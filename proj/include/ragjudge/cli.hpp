// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ragjudge/backend.hpp"
#include "ragjudge/datasets.hpp"
#include "ragjudge/errors.hpp"
#include "ragjudge/pipeline.hpp"
#include "ragjudge/prompting.hpp"

namespace ragjudge::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

namespace detail {

struct EvalOptions {
  std::string dataset;
  std::string out{"ragjudge-out"};
  std::string strategy{"r2"};
  std::string score{"recall"};
  std::string auc_normalization{"mean"};
  std::string endpoint{"http://127.0.0.1:8080/v1"};
  std::string model{"default"};
  std::string api_key;
  double temperature{backend::kDefaultTemperature};
  int max_tokens{backend::kDefaultMaxTokens};
  int concurrency{4};
  int retries{backend::kDefaultRetries};
  int repairs{backend::kDefaultRepairs};
  int backoff_ms{500};
  std::string cache_dir;
  std::string replay;
  std::string record_replay;
  std::string templates;
  std::optional<std::int64_t> seed;
  int repeats{1};
  bool native_schema{false};
};

inline void add_eval_options(CLI::App& cmd, EvalOptions& o, bool correctness) {
  cmd.add_option("--dataset", o.dataset, "JSONL dataset file")->required();
  cmd.add_option("--out", o.out, "Output directory")->capture_default_str();
  cmd.add_option("--strategy", o.strategy, "Verdict parsing: r1, r2 or c")
      ->check(CLI::IsMember({"r1", "r2", "c", "regex1", "regex2", "constrained"}))
      ->capture_default_str();
  if (correctness) {
    cmd.add_option("--score", o.score, "Per-sample correctness score")
        ->check(CLI::IsMember({"recall", "f1"}))
        ->capture_default_str();
    cmd.add_option("--auc-normalization", o.auc_normalization, "Headline F1-AUC normalization")
        ->check(CLI::IsMember({"mean", "paper"}))
        ->capture_default_str();
  }
  cmd.add_option("--endpoint", o.endpoint, "OpenAI-compatible base URL")->capture_default_str();
  cmd.add_option("--model", o.model, "Model id sent to the backend")->capture_default_str();
  cmd.add_option("--api-key", o.api_key, "Bearer token (or RAGJUDGE_API_KEY / OPENAI_API_KEY)");
  cmd.add_option("--temperature", o.temperature)->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd.add_option("--max-tokens", o.max_tokens)->check(CLI::PositiveNumber)->capture_default_str();
  cmd.add_option("--concurrency", o.concurrency, "Parallel samples and in-flight requests")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_option("--retries", o.retries, "Retries for transient backend errors")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd.add_option("--repairs", o.repairs, "Re-prompts for non-conforming structured replies")
      ->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmd.add_option("--backoff-ms", o.backoff_ms, "Base retry delay")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmd.add_option("--cache-dir", o.cache_dir, "On-disk response cache");
  cmd.add_option("--replay", o.replay, "Answer from a replay file instead of a live backend");
  cmd.add_option("--record-replay", o.record_replay, "Save every live completion to this replay file");
  cmd.add_option("--templates", o.templates, "Directory of prompt template overrides");
  cmd.add_option("--seed", o.seed, "Sampling seed forwarded to the backend");
  cmd.add_option("--repeats", o.repeats, "Independent runs (seed is incremented per run)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmd.add_flag("--native-schema", o.native_schema, "Send schemas as response_format constraints");
}

inline pipeline::RunConfig to_config(const EvalOptions& o, pipeline::Task task) {
  pipeline::RunConfig c;
  c.task = task;
  c.strategy = verdicts::parse_strategy(o.strategy);
  c.correctness_score = pipeline::parse_correctness_score(o.score);
  c.auc_normalization = pipeline::parse_auc_normalization(o.auc_normalization);
  c.endpoint = o.endpoint;
  c.api_key = o.api_key;
  if (c.api_key.empty()) {
    for (const char* var : {"RAGJUDGE_API_KEY", "OPENAI_API_KEY"}) {
      if (const char* v = std::getenv(var); v && *v) {
        c.api_key = v;
        break;
      }
    }
  }
  c.model_id = o.model;
  c.temperature = o.temperature;
  c.max_tokens = o.max_tokens;
  c.concurrency = o.concurrency;
  c.max_retries = o.retries;
  c.repair_attempts = o.repairs;
  c.backoff_base = std::chrono::milliseconds(o.backoff_ms);
  c.native_schema = o.native_schema;
  if (!o.cache_dir.empty()) c.cache_dir = o.cache_dir;
  if (!o.replay.empty()) c.replay_file = o.replay;
  if (!o.templates.empty()) c.template_dir = o.templates;
  c.dataset = o.dataset;
  c.output_dir = o.out;
  c.seed = o.seed;
  return c;
}

inline json headline(const pipeline::RunReport& r) {
  json h = {{"task", pipeline::to_string(r.task)},
            {"evaluator", r.evaluator},
            {"n_samples", r.n_samples},
            {"n_scored", r.n_scored},
            {"parse_failure_rate", r.parse_failure_rate}};
  for (const char* k : {"f1_auc", "f1_auc_mean", "f1_auc_paper", "spearman", "kendall", "worst", "middle", "best"}) {
    if (r.aggregates.contains(k)) h[k] = r.aggregates[k];
  }
  return h;
}

inline json repeat_summary(const std::vector<json>& runs) {
  json summary = {{"repeats", runs.size()}, {"runs", runs}, {"mean", json::object()}, {"stddev", json::object()}};
  for (const char* k : {"f1_auc", "spearman", "kendall", "worst", "middle", "best", "parse_failure_rate"}) {
    std::vector<double> values;
    for (const auto& r : runs) {
      if (r.contains(k) && r[k].is_number()) values.push_back(r[k].get<double>());
    }
    if (values.empty()) continue;
    double mean = 0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double var = 0;
    for (double v : values) var += (v - mean) * (v - mean);
    summary["mean"][k] = mean;
    summary["stddev"][k] = values.size() > 1 ? std::sqrt(var / static_cast<double>(values.size() - 1)) : 0.0;
  }
  return summary;
}

inline int run_eval(const EvalOptions& o, pipeline::Task task, std::ostream& out) {
  auto config = to_config(o, task);
  config.validate();

  std::shared_ptr<backend::Transport> transport = pipeline::make_transport(config);
  std::shared_ptr<backend::RecordingTransport> recorder;
  if (!o.record_replay.empty()) {
    recorder = std::make_shared<backend::RecordingTransport>(transport);
    transport = recorder;
  }
  auto client = pipeline::make_client(config, transport);

  std::vector<json> runs;
  for (int r = 0; r < o.repeats; ++r) {
    auto run_config = config;
    if (o.repeats > 1) {
      run_config.seed = config.seed.value_or(0) + r;
      run_config.output_dir = config.output_dir / ("run_" + std::to_string(r + 1));
    }
    auto report = pipeline::run(run_config, *client);
    pipeline::write_outputs(report, run_config.output_dir);
    runs.push_back(headline(report));
    out << runs.back().dump() << '\n';
  }
  if (o.repeats > 1) {
    std::ofstream summary(config.output_dir / "summary.json", std::ios::binary | std::ios::trunc);
    summary << repeat_summary(runs).dump(2) << '\n';
  }
  if (recorder) recorder->recorded().save(o.record_replay);
  return kExitOk;
}

}  // namespace detail

// Entry point shared by the ragjudge executable and the tests.
inline int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  CLI::App app{"Judge RAG answers for correctness and faithfulness", "ragjudge"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option values (sections named after subcommands)");

  detail::EvalOptions correctness_opts;
  auto* eval_c = app.add_subcommand("eval-correctness", "Score answers against ground truth with an LLM judge");
  detail::add_eval_options(*eval_c, correctness_opts, true);

  detail::EvalOptions faithfulness_opts;
  auto* eval_f = app.add_subcommand("eval-faithfulness", "Score good/poor answer pairs against their context");
  detail::add_eval_options(*eval_f, faithfulness_opts, false);

  std::string base_task{"correctness"}, base_dataset, base_out{"ragjudge-out"}, base_norm{"mean"};
  bool drop_articles = false;
  auto* baselines = app.add_subcommand("baselines", "Token-overlap baselines (no backend)");
  baselines->add_option("--task", base_task)->check(CLI::IsMember({"correctness", "faithfulness"}))->capture_default_str();
  baselines->add_option("--dataset", base_dataset, "JSONL dataset file")->required();
  baselines->add_option("--out", base_out, "Output directory")->capture_default_str();
  baselines->add_option("--auc-normalization", base_norm)->check(CLI::IsMember({"mean", "paper"}))->capture_default_str();
  baselines->add_flag("--drop-articles", drop_articles, "Remove a/an/the before matching tokens");

  std::string report_in, report_out, report_norm{"mean"};
  auto* report = app.add_subcommand("report", "Recompute aggregates from a per_sample.jsonl file");
  report->add_option("--per-sample", report_in, "per_sample.jsonl from an earlier run")->required()->check(CLI::ExistingFile);
  report->add_option("--out", report_out, "Write report.json and histogram.csv here");
  report->add_option("--auc-normalization", report_norm)->check(CLI::IsMember({"mean", "paper"}))->capture_default_str();

  std::string validate_task{"correctness"}, validate_dataset;
  auto* validate = app.add_subcommand("validate-dataset", "Check a dataset file and print its size");
  validate->add_option("--task", validate_task)->check(CLI::IsMember({"correctness", "faithfulness"}))->capture_default_str();
  validate->add_option("--dataset", validate_dataset)->required();

  std::string templates_out;
  auto* dump = app.add_subcommand("dump-templates", "Write the built-in prompt templates to a directory");
  dump->add_option("--out", templates_out)->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  try {
    if (*eval_c) return detail::run_eval(correctness_opts, pipeline::Task::Correctness, out);
    if (*eval_f) return detail::run_eval(faithfulness_opts, pipeline::Task::Faithfulness, out);

    if (*baselines) {
      pipeline::RunConfig config;
      config.task = base_task == "correctness" ? pipeline::Task::Correctness : pipeline::Task::Faithfulness;
      config.dataset = base_dataset;
      config.output_dir = base_out;
      config.auc_normalization = pipeline::parse_auc_normalization(base_norm);
      config.tokenizer.drop_articles = drop_articles;
      const auto r = pipeline::run_baselines(config);
      pipeline::write_outputs(r, config.output_dir);
      out << detail::headline(r).dump() << '\n';
      return kExitOk;
    }

    if (*report) {
      const auto r = pipeline::report_from_per_sample(report_in, pipeline::parse_auc_normalization(report_norm));
      if (!report_out.empty()) {
        std::filesystem::create_directories(report_out);
        std::ofstream(std::filesystem::path(report_out) / "report.json", std::ios::binary | std::ios::trunc)
            << pipeline::report_json(r).dump(2) << '\n';
        std::ofstream(std::filesystem::path(report_out) / "histogram.csv", std::ios::binary | std::ios::trunc)
            << pipeline::histogram_csv(r.histogram);
      }
      out << detail::headline(r).dump() << '\n';
      return kExitOk;
    }

    if (*validate) {
      std::size_t n = 0;
      std::vector<std::string> warnings;
      if (validate_task == "correctness") {
        auto ds = datasets::load_correctness(validate_dataset);
        n = ds.samples.size();
        warnings = ds.warnings;
      } else {
        auto ds = datasets::load_faithfulness(validate_dataset);
        n = ds.samples.size();
        warnings = ds.warnings;
      }
      out << "ok: " << n << " samples\n";
      for (const auto& w : warnings) err << "warning: " << w << '\n';
      return kExitOk;
    }

    if (*dump) {
      prompts::TemplateSet{}.write(templates_out);
      out << "wrote templates to " << templates_out << '\n';
      return kExitOk;
    }
  } catch (const RecordValidationError& e) {
    err << "error: " << e.what() << '\n';
    for (const auto& issue : e.issues) err << "  line " << issue.line << ": " << issue.message << '\n';
    return kExitFailure;
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitUsage;
}

}  // namespace ragjudge::cli
