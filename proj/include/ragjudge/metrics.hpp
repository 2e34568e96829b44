// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ragjudge/core_types.hpp"
#include "ragjudge/errors.hpp"

namespace ragjudge::metrics {

// ---------------- verdict-count scores ----------------

// Fraction of ground-truth-relevant statements recovered. FP statements are
// extra information the reference does not mention and do not lower recall.
inline Ratio recall_ratio(const CorrectnessCounts& c) {
  if (c.tp() + c.fn() == 0) throw UndefinedScore("recall undefined: tp + fn = 0");
  return Ratio(c.tp(), c.tp() + c.fn());
}

inline double recall(const CorrectnessCounts& c) { return recall_ratio(c).value(); }

// tp / (tp + (fp + fn) / 2), kept exact as 2tp / (2tp + fp + fn).
inline Ratio f1_ratio(const CorrectnessCounts& c) {
  if (c.total() == 0) throw UndefinedScore("f1 undefined: all counts are zero");
  return Ratio(2 * c.tp(), 2 * c.tp() + c.fp() + c.fn());
}

inline double f1(const CorrectnessCounts& c) { return f1_ratio(c).value(); }

inline Ratio precision_ratio(const FaithfulnessCounts& c) {
  if (c.total() == 0) throw UndefinedScore("precision undefined: passed + failed = 0");
  return Ratio(c.passed(), c.total());
}

inline double precision_faithfulness(const FaithfulnessCounts& c) { return precision_ratio(c).value(); }

// ---------------- F1-AUC ----------------

inline int threshold_decision(double r, double th) { return r >= th ? 1 : 0; }

enum class AucNormalization {
  Mean,   // sum of the 11 F1 values / 11, bounded by 1
  Paper,  // sum / 10, the literal published form
};

inline std::string_view to_string(AucNormalization n) { return n == AucNormalization::Mean ? "mean" : "paper"; }

inline constexpr std::size_t kThresholdCount = 11;

inline std::array<double, kThresholdCount> threshold_grid() {
  std::array<double, kThresholdCount> grid{};
  for (std::size_t i = 0; i < kThresholdCount; ++i) grid[i] = static_cast<double>(i) / 10.0;
  return grid;
}

// Binary F1 with label 1 as the positive class. When neither predictions nor
// labels contain a positive the two vectors agree everywhere and F1 is 1.
inline double binary_f1(std::span<const int> predicted, std::span<const int> labels) {
  if (predicted.size() != labels.size()) throw LengthMismatch("binary_f1: length mismatch");
  std::int64_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    if (predicted[i] == 1 && labels[i] == 1) ++tp;
    else if (predicted[i] == 1) ++fp;
    else if (labels[i] == 1) ++fn;
  }
  if (tp + fp + fn == 0) return 1.0;
  return static_cast<double>(2 * tp) / static_cast<double>(2 * tp + fp + fn);
}

struct ThresholdedF1Curve {
  std::vector<double> thresholds;
  std::vector<double> f1_values;
  double auc{0.0};
  AucNormalization normalization{AucNormalization::Mean};
};

inline double normalize_auc(double f1_sum, AucNormalization n) {
  return n == AucNormalization::Mean ? f1_sum / static_cast<double>(kThresholdCount) : f1_sum / 10.0;
}

inline ThresholdedF1Curve f1_auc(std::span<const double> scores, std::span<const int> labels,
                                 AucNormalization normalization = AucNormalization::Mean) {
  if (scores.size() != labels.size()) throw LengthMismatch("f1_auc: scores and labels differ in length");
  if (scores.empty()) throw EmptyInput("f1_auc: no scores");
  for (int h : labels) {
    if (h != 0 && h != 1) throw std::invalid_argument("f1_auc: labels must be 0 or 1");
  }

  ThresholdedF1Curve curve;
  curve.normalization = normalization;
  std::vector<int> predicted(scores.size());
  double sum = 0.0;
  for (double th : threshold_grid()) {
    std::transform(scores.begin(), scores.end(), predicted.begin(),
                   [th](double r) { return threshold_decision(r, th); });
    const double value = binary_f1(predicted, labels);
    curve.thresholds.push_back(th);
    curve.f1_values.push_back(value);
    sum += value;
  }
  curve.auc = normalize_auc(sum, normalization);
  return curve;
}

// ---------------- rank correlations ----------------

// 1-based fractional ranks; tied values share the mean of their positions.
inline std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

namespace detail {

inline void check_correlation_input(std::span<const double> x, std::span<const double> y, const char* who) {
  if (x.size() != y.size()) throw LengthMismatch(std::string(who) + ": length mismatch");
  if (x.size() < 2) throw DegenerateInput(std::string(who) + ": need at least two observations");
  const auto constant = [](std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [&](double a) { return a == v.front(); });
  };
  if (constant(x) || constant(y)) throw DegenerateInput(std::string(who) + ": constant input");
}

inline double pearson(std::span<const double> a, std::span<const double> b) {
  const double n = static_cast<double>(a.size());
  const double mean_a = std::accumulate(a.begin(), a.end(), 0.0) / n;
  const double mean_b = std::accumulate(b.begin(), b.end(), 0.0) / n;
  double cov = 0.0, var_a = 0.0, var_b = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - mean_a;
    const double db = b[i] - mean_b;
    cov += da * db;
    var_a += da * da;
    var_b += db * db;
  }
  return std::clamp(cov / std::sqrt(var_a * var_b), -1.0, 1.0);
}

inline int sign(double v) { return (v > 0) - (v < 0); }

}  // namespace detail

inline double spearman(std::span<const double> x, std::span<const double> y) {
  detail::check_correlation_input(x, y, "spearman");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  return detail::pearson(rx, ry);
}

// Kendall tau-b.
inline double kendall(std::span<const double> x, std::span<const double> y) {
  detail::check_correlation_input(x, y, "kendall");
  const std::size_t n = x.size();
  std::int64_t concordant = 0, discordant = 0, tied_x = 0, tied_y = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const int sx = detail::sign(x[i] - x[j]);
      const int sy = detail::sign(y[i] - y[j]);
      if (sx == 0) ++tied_x;
      if (sy == 0) ++tied_y;
      if (sx == 0 || sy == 0) continue;
      if (sx == sy) ++concordant;
      else ++discordant;
    }
  }
  const auto pairs = static_cast<std::int64_t>(n * (n - 1) / 2);
  const double denom =
      std::sqrt(static_cast<double>(pairs - tied_x)) * std::sqrt(static_cast<double>(pairs - tied_y));
  return std::clamp(static_cast<double>(concordant - discordant) / denom, -1.0, 1.0);
}

// ---------------- pairwise faithfulness ----------------

inline double pair_score(const Ratio& good, const Ratio& poor) {
  if (good > poor) return 1.0;
  if (good == poor) return 0.5;
  return 0.0;
}

inline double pair_score(double good, double poor) {
  if (good > poor) return 1.0;
  if (good == poor) return 0.5;
  return 0.0;
}

inline double pair_score(const std::optional<Ratio>& good, const std::optional<Ratio>& poor) {
  if (!good || !poor) throw UndefinedScore("pair_score: a faithfulness score is null");
  return pair_score(*good, *poor);
}

struct PairScoreAggregate {
  double worst{0.0};
  double middle{0.0};
  double best{0.0};
  std::int64_t n{0};
  std::int64_t wins{0};
  std::int64_t ties{0};

  Ratio worst_ratio() const { return Ratio(wins, n); }
  Ratio middle_ratio() const { return Ratio(2 * wins + ties, 2 * n); }
  Ratio best_ratio() const { return Ratio(wins + ties, n); }
  Ratio tie_fraction() const { return Ratio(ties, n); }
};

inline PairScoreAggregate aggregate_pair_scores(std::span<const std::pair<Ratio, Ratio>> pairs) {
  if (pairs.empty()) throw EmptyInput("aggregate_pair_scores: no pairs");
  PairScoreAggregate agg;
  agg.n = static_cast<std::int64_t>(pairs.size());
  for (const auto& [good, poor] : pairs) {
    if (good > poor) ++agg.wins;
    else if (good == poor) ++agg.ties;
  }
  agg.worst = agg.worst_ratio().value();
  agg.middle = agg.middle_ratio().value();
  agg.best = agg.best_ratio().value();
  return agg;
}

// ---------------- token-overlap baselines ----------------

struct TokenizerOptions {
  bool lowercase{true};
  bool strip_punctuation{true};
  bool drop_articles{false};  // a / an / the
};

inline std::vector<std::string> normalize_tokens(std::string_view text, const TokenizerOptions& opts = {}) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char ch : text) {
    const auto u = static_cast<unsigned char>(ch);
    if (opts.strip_punctuation && u < 0x80 && std::ispunct(u)) continue;
    cleaned.push_back(opts.lowercase && u < 0x80 ? static_cast<char>(std::tolower(u)) : ch);
  }

  std::vector<std::string> tokens;
  std::size_t i = 0;
  while (i < cleaned.size()) {
    while (i < cleaned.size() && std::isspace(static_cast<unsigned char>(cleaned[i]))) ++i;
    std::size_t j = i;
    while (j < cleaned.size() && !std::isspace(static_cast<unsigned char>(cleaned[j]))) ++j;
    if (j > i) {
      std::string token = cleaned.substr(i, j - i);
      const bool article = token == "a" || token == "an" || token == "the";
      if (!(opts.drop_articles && article)) tokens.push_back(std::move(token));
    }
    i = j;
  }
  return tokens;
}

namespace detail {

// Size of the multiset intersection, counted from `probe`'s side.
inline std::int64_t multiset_overlap(const std::vector<std::string>& probe, const std::vector<std::string>& pool) {
  std::unordered_map<std::string_view, std::int64_t> available;
  for (const auto& t : pool) ++available[t];
  std::int64_t hits = 0;
  for (const auto& t : probe) {
    auto it = available.find(t);
    if (it != available.end() && it->second > 0) {
      --it->second;
      ++hits;
    }
  }
  return hits;
}

}  // namespace detail

inline Ratio bot_recall_ratio(std::string_view answer, std::string_view ground_truth,
                              const TokenizerOptions& opts = {}) {
  const auto truth = normalize_tokens(ground_truth, opts);
  if (truth.empty()) throw UndefinedScore("bot_recall: ground truth has no tokens");
  const auto produced = normalize_tokens(answer, opts);
  const auto hits = detail::multiset_overlap(truth, produced);
  return Ratio(hits, static_cast<std::int64_t>(truth.size()));
}

inline double bot_recall(std::string_view answer, std::string_view ground_truth, const TokenizerOptions& opts = {}) {
  return bot_recall_ratio(answer, ground_truth, opts).value();
}

inline Ratio k_precision_ratio(std::string_view answer, std::string_view context, const TokenizerOptions& opts = {}) {
  const auto produced = normalize_tokens(answer, opts);
  if (produced.empty()) throw UndefinedScore("k_precision: answer has no tokens");
  const auto ctx = normalize_tokens(context, opts);
  const auto hits = detail::multiset_overlap(produced, ctx);
  return Ratio(hits, static_cast<std::int64_t>(produced.size()));
}

inline double k_precision(std::string_view answer, std::string_view context, const TokenizerOptions& opts = {}) {
  return k_precision_ratio(answer, context, opts).value();
}

}  // namespace ragjudge::metrics
