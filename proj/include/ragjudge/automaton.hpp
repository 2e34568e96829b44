// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include <json.hpp>

#include "ragjudge/errors.hpp"
#include "ragjudge/schema.hpp"

namespace ragjudge::automaton {

using TokenId = std::uint32_t;

// Structural tokens come first, then one key token per label ("\"TP\":"),
// then one token per statement index 1..n.
inline constexpr TokenId kOpenBrace = 0;
inline constexpr TokenId kCloseBrace = 1;
inline constexpr TokenId kOpenBracket = 2;
inline constexpr TokenId kCloseBracket = 3;
inline constexpr TokenId kComma = 4;
inline constexpr TokenId kFirstKeyToken = 5;

inline constexpr std::size_t kMaxStatements = 64;

enum class Phase : std::uint8_t {
  Start,             // before '{'
  ExpectKey,         // before the key of list `list`
  ExpectOpenBracket, // after the key, before '['
  ListOpened,        // after '['
  AfterItem,         // after an index
  AfterComma,        // after ',' inside a list
  AfterListClose,    // after ']'
  Accept,            // after the final '}'
};

struct State {
  Phase phase{Phase::Start};
  std::uint8_t list{0};     // label currently being filled
  std::uint64_t used{0};    // bit i-1 set once index i has been emitted
  std::uint8_t last{0};     // last index emitted into the current list, 0 if none

  friend bool operator==(const State&, const State&) = default;
};

struct StateHash {
  std::size_t operator()(const State& s) const noexcept {
    std::uint64_t h = s.used * 0x9E3779B97F4A7C15ull;
    h ^= (static_cast<std::uint64_t>(s.phase) << 56) ^ (static_cast<std::uint64_t>(s.list) << 48) ^
         (static_cast<std::uint64_t>(s.last) << 40);
    return static_cast<std::size_t>(h ^ (h >> 29));
  }
};

// Finite-state automaton accepting exactly the compact JSON documents
//   {"L1":[...],"L2":[...],...}
// in which every statement index 1..n appears in exactly one list and each
// list is ascending. One accepted document per assignment of indices to
// labels, so n statements over k labels give k^n documents.
//
// Transitions are computed on demand from the state; only transitions from
// which the accepting state remains reachable are offered, so there are no
// dead ends.
class SchemaAutomaton {
 public:
  SchemaAutomaton(const nlohmann::json& label_schema, std::size_t statement_count)
      : labels_(schema::label_list_shape(label_schema)), n_(statement_count) {
    if (statement_count == 0) throw std::invalid_argument("statement_count must be at least 1");
    if (statement_count > kMaxStatements) {
      throw std::invalid_argument("statement_count above " + std::to_string(kMaxStatements) + " is not supported");
    }
    if (labels_.size() > 200) throw UnsupportedSchema("too many labels");
    vocabulary_ = {"{", "}", "[", "]", ","};
    for (const auto& label : labels_) vocabulary_.push_back(nlohmann::json(label).dump() + ":");
    for (std::size_t i = 1; i <= n_; ++i) vocabulary_.push_back(std::to_string(i));
  }

  const std::vector<std::string>& labels() const { return labels_; }
  const std::vector<std::string>& vocabulary() const { return vocabulary_; }
  std::size_t statement_count() const { return n_; }

  TokenId key_token(std::size_t list) const { return kFirstKeyToken + static_cast<TokenId>(list); }
  TokenId index_token(std::size_t index) const {
    return kFirstKeyToken + static_cast<TokenId>(labels_.size() + index - 1);
  }
  bool is_index_token(TokenId t) const { return t >= index_token(1) && t < vocabulary_.size(); }
  std::size_t index_of(TokenId t) const { return t - index_token(1) + 1; }

  State start() const { return State{}; }
  bool is_accepting(const State& s) const { return s.phase == Phase::Accept; }

  // Tokens with a defined transition from `s`, ascending by id. Empty only at
  // the accepting state.
  std::vector<TokenId> valid_next_tokens(const State& s) const {
    require_known(s);
    std::vector<TokenId> out;
    switch (s.phase) {
      case Phase::Start: out.push_back(kOpenBrace); break;
      case Phase::ExpectKey: out.push_back(key_token(s.list)); break;
      case Phase::ExpectOpenBracket: out.push_back(kOpenBracket); break;
      case Phase::ListOpened:
        if (close_viable(s)) out.push_back(kCloseBracket);
        append_viable_indices(s, out);
        break;
      case Phase::AfterItem:
        if (close_viable(s)) out.push_back(kCloseBracket);
        if (has_viable_index(s)) out.push_back(kComma);
        break;
      case Phase::AfterComma: append_viable_indices(s, out); break;
      case Phase::AfterListClose: out.push_back(is_last_list(s) ? kCloseBrace : kComma); break;
      case Phase::Accept: break;
    }
    std::sort(out.begin(), out.end());
    return out;
  }

  State next(const State& s, TokenId token) const {
    const auto allowed = valid_next_tokens(s);
    if (!std::binary_search(allowed.begin(), allowed.end(), token)) {
      throw std::invalid_argument("token '" + token_text(token) + "' is not valid in this state");
    }
    State t = s;
    switch (s.phase) {
      case Phase::Start: t.phase = Phase::ExpectKey; break;
      case Phase::ExpectKey: t.phase = Phase::ExpectOpenBracket; break;
      case Phase::ExpectOpenBracket: t.phase = Phase::ListOpened; t.last = 0; break;
      case Phase::ListOpened:
      case Phase::AfterComma:
      case Phase::AfterItem:
        if (token == kCloseBracket) {
          t.phase = Phase::AfterListClose;
          t.last = 0;
        } else if (token == kComma) {
          t.phase = Phase::AfterComma;
        } else {
          const auto index = index_of(token);
          t.used |= bit(index);
          t.last = static_cast<std::uint8_t>(index);
          t.phase = Phase::AfterItem;
        }
        break;
      case Phase::AfterListClose:
        if (token == kCloseBrace) {
          t.phase = Phase::Accept;
        } else {
          t.phase = Phase::ExpectKey;
          ++t.list;
        }
        break;
      case Phase::Accept: break;
    }
    return t;
  }

  const std::string& token_text(TokenId t) const {
    if (t >= vocabulary_.size()) throw std::out_of_range("token id out of range");
    return vocabulary_[t];
  }

  std::string detokenize(std::span<const TokenId> tokens) const {
    std::string out;
    for (auto t : tokens) out += token_text(t);
    return out;
  }

  // True iff `s` is reachable from the start state.
  bool is_reachable(const State& s) const {
    const std::size_t k = labels_.size();
    if (s.list >= k) return false;
    if (n_ < 64 && (s.used >> n_) != 0) return false;
    const bool full = s.used == full_mask();
    const bool in_list = s.phase == Phase::AfterItem || s.phase == Phase::AfterComma;
    if (!in_list && s.last != 0) return false;
    if (in_list && (s.last == 0 || s.last > n_ || !(s.used & bit(s.last)))) return false;

    switch (s.phase) {
      case Phase::Start: return s.list == 0 && s.used == 0;
      case Phase::Accept: return s.list == k - 1 && full;
      case Phase::ExpectKey:
      case Phase::ExpectOpenBracket:
      case Phase::ListOpened:
        return s.list != 0 || s.used == 0;
      case Phase::AfterListClose: return !is_last_list(s) || full;
      case Phase::AfterItem:
      case Phase::AfterComma: {
        // the first list holds exactly the emitted indices, ascending
        if (s.list == 0 && std::bit_width(s.used) != s.last) return false;
        if (is_last_list(s) && (s.used | (bit(s.last) - 1)) != s.used) return false;
        return s.phase == Phase::AfterItem || has_viable_index(s);
      }
    }
    return false;
  }

  // Every reachable state. Exponential in n; meant for small instances.
  std::vector<State> reachable_states() const {
    std::vector<State> order;
    std::unordered_set<State, StateHash> seen{start()};
    std::deque<State> queue{start()};
    while (!queue.empty()) {
      const State s = queue.front();
      queue.pop_front();
      order.push_back(s);
      for (auto t : valid_next_tokens(s)) {
        const State u = next(s, t);
        if (seen.insert(u).second) queue.push_back(u);
      }
    }
    return order;
  }

 private:
  std::uint64_t bit(std::size_t index) const { return std::uint64_t{1} << (index - 1); }
  std::uint64_t full_mask() const { return n_ == 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << n_) - 1; }
  bool is_last_list(const State& s) const { return s.list + 1u == labels_.size(); }
  bool is_used(const State& s, std::size_t i) const { return (s.used & bit(i)) != 0; }

  std::size_t lowest_unused(const State& s) const {
    const auto free = ~s.used & full_mask();
    return free == 0 ? 0 : static_cast<std::size_t>(std::countr_zero(free)) + 1;
  }

  // In the last list every remaining index must still fit in ascending order,
  // so only the lowest unused one may come next.
  bool index_viable(const State& s, std::size_t i) const {
    if (is_used(s, i) || i <= s.last) return false;
    return !is_last_list(s) || i == lowest_unused(s);
  }

  bool has_viable_index(const State& s) const {
    for (std::size_t i = s.last + 1u; i <= n_; ++i) {
      if (index_viable(s, i)) return true;
    }
    return false;
  }

  void append_viable_indices(const State& s, std::vector<TokenId>& out) const {
    for (std::size_t i = s.last + 1u; i <= n_; ++i) {
      if (index_viable(s, i)) out.push_back(index_token(i));
    }
  }

  bool close_viable(const State& s) const { return !is_last_list(s) || s.used == full_mask(); }

  void require_known(const State& s) const {
    if (!is_reachable(s)) throw UnknownState("state is not reachable in this automaton");
  }

  std::vector<std::string> labels_;
  std::size_t n_{0};
  std::vector<std::string> vocabulary_;
};

inline SchemaAutomaton build_schema_automaton(const nlohmann::json& label_schema, std::size_t statement_count) {
  return SchemaAutomaton(label_schema, statement_count);
}

// ---------------- masked decoding against a local token model ----------------

// Produces one logit per vocabulary entry for the next position.
using TokenScorer =
    std::function<std::vector<double>(const SchemaAutomaton&, const State&, std::span<const TokenId> prefix)>;

struct DecodeOptions {
  double temperature{1.0};  // 0 selects the highest-scoring valid token
  std::size_t max_steps{100000};
};

struct DecodeResult {
  std::vector<TokenId> tokens;
  std::string text;
};

// Generates until the accepting state, sampling each step only among the
// tokens the automaton allows. Invalid tokens are masked out before the
// softmax, so the output always parses against the schema.
template <typename Rng>
DecodeResult decode_constrained(const SchemaAutomaton& fsa, const TokenScorer& scorer, Rng& rng,
                                const DecodeOptions& opts = {}) {
  DecodeResult result;
  State state = fsa.start();
  while (!fsa.is_accepting(state)) {
    if (result.tokens.size() >= opts.max_steps) throw std::runtime_error("decode_constrained: step limit reached");
    const auto allowed = fsa.valid_next_tokens(state);
    const auto logits = scorer(fsa, state, result.tokens);
    if (logits.size() != fsa.vocabulary().size()) throw std::invalid_argument("scorer returned wrong logit count");

    TokenId chosen = allowed.front();
    if (opts.temperature <= 0.0) {
      for (auto t : allowed) {
        if (logits[t] > logits[chosen]) chosen = t;
      }
    } else {
      double peak = -std::numeric_limits<double>::infinity();
      for (auto t : allowed) peak = std::max(peak, logits[t]);
      std::vector<double> weights;
      weights.reserve(allowed.size());
      for (auto t : allowed) weights.push_back(std::exp((logits[t] - peak) / opts.temperature));
      std::discrete_distribution<std::size_t> pick(weights.begin(), weights.end());
      chosen = allowed[pick(rng)];
    }
    result.tokens.push_back(chosen);
    state = fsa.next(state, chosen);
  }
  result.text = fsa.detokenize(result.tokens);
  return result;
}

// A token model that knows the label of each statement (labels[i] is the list
// index for statement i+1, or -1 if unknown) and steers the masked decoder
// toward placing every statement in its labelled list. Unknown statements
// drift to whichever list the mask leaves open.
inline TokenScorer label_following_scorer(std::vector<int> labels, double preference = 8.0) {
  return [labels = std::move(labels), preference](const SchemaAutomaton& fsa, const State& s,
                                                  std::span<const TokenId>) {
    std::vector<double> logits(fsa.vocabulary().size(), 0.0);
    const auto wants = [&](std::size_t index) {
      return index <= labels.size() && labels[index - 1] == static_cast<int>(s.list);
    };
    bool pending = false;
    for (auto t : fsa.valid_next_tokens(s)) {
      if (fsa.is_index_token(t) && wants(fsa.index_of(t))) {
        logits[t] = preference;
        pending = true;
      }
    }
    if (s.phase == Phase::AfterItem) {
      for (std::size_t i = s.last + 1u; i <= fsa.statement_count(); ++i) {
        if (wants(i) && !(s.used & (std::uint64_t{1} << (i - 1)))) pending = true;
      }
      logits[pending ? kComma : kCloseBracket] = preference;
    } else if (s.phase == Phase::ListOpened && !pending) {
      logits[kCloseBracket] = preference;
    }
    return logits;
  };
}

}  // namespace ragjudge::automaton
