// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <semaphore>
#include <shared_mutex>
#include <sstream>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <utility>

#include <json.hpp>

#include "ragjudge/core_types.hpp"
#include "ragjudge/digest.hpp"
#include "ragjudge/errors.hpp"
#include "ragjudge/schema.hpp"

namespace ragjudge::backend {

inline constexpr double kDefaultTemperature = 1.0;
inline constexpr int kDefaultMaxTokens = 2048;
inline constexpr int kDefaultRetries = 3;
inline constexpr int kDefaultRepairs = 2;

struct GenerationRequest {
  std::string model_id;
  std::optional<std::string> system_text;
  std::string user_text;
  double temperature{kDefaultTemperature};
  int max_tokens{kDefaultMaxTokens};
  std::optional<json> schema;
  std::optional<std::int64_t> seed;

  void validate() const {
    if (!(temperature >= 0.0)) throw std::invalid_argument("temperature must be >= 0");
    if (max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
  }
};

struct GenerationResult {
  std::string text;
  bool cached{false};
  std::chrono::milliseconds latency{0};
  int attempt_count{1};
};

// Cache key: everything that determines the completion except max_tokens.
inline std::string request_digest(const GenerationRequest& r) {
  const json key = {{"model", r.model_id},
                    {"system", r.system_text ? json(*r.system_text) : json(nullptr)},
                    {"user", r.user_text},
                    {"temperature", r.temperature},
                    {"schema", r.schema ? *r.schema : json(nullptr)},
                    {"seed", r.seed ? json(*r.seed) : json(nullptr)}};
  return sha256_hex(key.dump());
}

// Key used by the replay backend: the prompt only.
inline std::string prompt_digest(std::string_view system_text, std::string_view user_text) {
  return sha256_hex(json{{"system", system_text}, {"user", user_text}}.dump());
}

inline std::string prompt_digest(const GenerationRequest& r) {
  return prompt_digest(r.system_text.value_or(""), r.user_text);
}

// One chat-completion round trip. Implementations throw NetworkError when the
// server cannot be reached and BackendError for protocol-level failures;
// BackendError with status 429 or >= 500 is treated as transient.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual std::string complete(const GenerationRequest& request) = 0;
  virtual std::string describe() const = 0;
};

inline bool is_transient(const BackendError& e) { return e.status == 429 || e.status >= 500; }

// ---------------- response cache ----------------

// Content-addressed cache: `<dir>/<digest>.txt` holds one metadata line
// (JSON, prefixed by the magic below) followed by the raw completion text.
class ResponseCache {
 public:
  static constexpr std::string_view kMagic = "#ragjudge-cache ";

  explicit ResponseCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& directory() const { return dir_; }
  std::filesystem::path path_for(const std::string& digest) const { return dir_ / (digest + ".txt"); }

  std::optional<std::string> get(const std::string& digest) const {
    std::ifstream in(path_for(digest), std::ios::binary);
    if (!in) return std::nullopt;
    std::string header;
    if (!std::getline(in, header) || header.rfind(kMagic, 0) != 0) return std::nullopt;
    std::stringstream body;
    body << in.rdbuf();
    return body.str();
  }

  std::optional<json> metadata(const std::string& digest) const {
    std::ifstream in(path_for(digest), std::ios::binary);
    std::string header;
    if (!in || !std::getline(in, header) || header.rfind(kMagic, 0) != 0) return std::nullopt;
    return json::parse(header.substr(kMagic.size()), nullptr, false);
  }

  // Writes through a temporary file and renames it into place, so readers see
  // either no entry or a complete one. Concurrent writers of one key race
  // harmlessly: their contents are identical.
  void put(const std::string& digest, std::string_view text, const GenerationRequest& request) const {
    const json meta = {{"digest", digest},
                       {"model", request.model_id},
                       {"temperature", request.temperature},
                       {"max_tokens", request.max_tokens},
                       {"seed", request.seed ? json(*request.seed) : json(nullptr)},
                       {"constrained", request.schema.has_value()},
                       {"timestamp", timestamp_utc()}};
    static std::atomic<std::uint64_t> counter{0};
    const auto tmp = dir_ / (digest + ".tmp." + std::to_string(counter++) + "." +
                             std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())));
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << kMagic << meta.dump() << '\n' << text;
      if (!out) throw std::runtime_error("cache write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path_for(digest));
  }

  static std::string timestamp_utc() {
    const auto now = std::chrono::system_clock::now();
    const auto t = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
  }

 private:
  std::filesystem::path dir_;
};

// ---------------- client ----------------

struct ClientConfig {
  int max_retries{kDefaultRetries};
  std::chrono::milliseconds backoff_base{500};
  int repair_attempts{kDefaultRepairs};
  int max_in_flight{4};
  std::optional<std::filesystem::path> cache_dir;
};

namespace detail {

inline std::string strip_code_fence(std::string_view text) {
  auto t = ragjudge::detail::trim(text);
  if (t.rfind("```", 0) == 0) {
    const auto first_nl = t.find('\n');
    const auto close = t.rfind("```");
    if (first_nl != std::string_view::npos && close != std::string_view::npos && close > first_nl) {
      t = ragjudge::detail::trim(t.substr(first_nl + 1, close - first_nl - 1));
    }
  }
  return std::string(t);
}

}  // namespace detail

// Finds the JSON document in a model reply: the whole reply (code fences
// removed) if it parses, else the span from the first '{' to the last '}'.
inline std::optional<std::pair<std::string, json>> extract_json(std::string_view reply) {
  const auto body = detail::strip_code_fence(reply);
  if (auto doc = json::parse(body, nullptr, false); !doc.is_discarded()) return std::pair{body, doc};
  const auto open = body.find('{');
  const auto close = body.rfind('}');
  if (open == std::string::npos || close == std::string::npos || close < open) return std::nullopt;
  auto candidate = body.substr(open, close - open + 1);
  auto doc = json::parse(candidate, nullptr, false);
  if (doc.is_discarded()) return std::nullopt;
  return std::pair{std::move(candidate), std::move(doc)};
}

inline std::string repair_instruction(std::string_view previous_reply, std::string_view problem) {
  std::string out = "\n\nYour previous reply was:\n";
  out += previous_reply;
  out += "\n\nIt was rejected: ";
  out += problem;
  out += "\nReply with only a JSON object that satisfies the required structure, nothing else.";
  return out;
}

// Shared entry point to the inference backend. Safe to use from many threads:
// at most `max_in_flight` transport calls run at once and the cache layers
// tolerate concurrent readers and writers.
class Client {
 public:
  Client(std::shared_ptr<Transport> transport, ClientConfig config = {})
      : transport_(std::move(transport)),
        config_(std::move(config)),
        in_flight_(std::max(1, config_.max_in_flight)) {
    if (!transport_) throw std::invalid_argument("Client needs a transport");
    if (config_.max_in_flight < 1) throw std::invalid_argument("max_in_flight must be >= 1");
    if (config_.max_retries < 0 || config_.repair_attempts < 0) {
      throw std::invalid_argument("retry and repair limits must be >= 0");
    }
    if (config_.cache_dir) disk_.emplace(*config_.cache_dir);
  }

  Client(const Client&) = delete;
  Client& operator=(const Client&) = delete;

  const ClientConfig& config() const { return config_; }
  Transport& transport() { return *transport_; }
  std::uint64_t transport_calls() const { return transport_calls_.load(); }

  GenerationResult generate(const GenerationRequest& request) {
    request.validate();
    const auto started = std::chrono::steady_clock::now();
    const auto digest = request_digest(request);

    if (auto hit = lookup(digest)) {
      return GenerationResult{std::move(*hit), true, elapsed(started), 1};
    }

    int attempt = 0;
    std::string text;
    while (true) {
      ++attempt;
      try {
        in_flight_.acquire();
        struct Release {
          std::counting_semaphore<>& sem;
          ~Release() { sem.release(); }
        } release{in_flight_};
        ++transport_calls_;
        text = transport_->complete(request);
        break;
      } catch (const NetworkError&) {
        if (attempt > config_.max_retries) throw;
      } catch (const BackendError& e) {
        if (!is_transient(e) || attempt > config_.max_retries) throw;
      }
      backoff(attempt);
    }

    if (ragjudge::detail::trim(text).empty()) throw EmptyCompletion("backend returned an empty completion");
    store(digest, text, request);
    return GenerationResult{std::move(text), false, elapsed(started), attempt};
  }

  // Generation whose reply must be JSON valid against `request.schema`. The
  // schema travels with the request (transports that support native
  // constraints pass it on); the reply is validated here regardless and
  // re-prompted with the rejection reason up to `repair_attempts` times.
  GenerationResult generate_constrained(const GenerationRequest& request) {
    if (!request.schema) throw std::invalid_argument("generate_constrained needs a schema");
    const auto& target = *request.schema;
    if (!target.is_object()) throw std::invalid_argument("schema must be a JSON object");

    const auto started = std::chrono::steady_clock::now();
    GenerationRequest round = request;
    std::string problem;
    for (int attempt = 1; attempt <= config_.repair_attempts + 1; ++attempt) {
      auto reply = generate(round);
      auto found = extract_json(reply.text);
      if (!found) {
        problem = "the reply is not JSON";
      } else if (auto violation = schema::validate(found->second, target)) {
        problem = "the JSON does not match the schema (" + *violation + ")";
      } else {
        return GenerationResult{std::move(found->first), reply.cached, elapsed(started), attempt};
      }
      round.user_text = request.user_text + repair_instruction(reply.text, problem);
    }
    throw SchemaViolation("no schema-conforming reply after " + std::to_string(config_.repair_attempts + 1) +
                          " attempts: " + problem);
  }

 private:
  static std::chrono::milliseconds elapsed(std::chrono::steady_clock::time_point since) {
    return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - since);
  }

  void backoff(int attempt) const {
    if (config_.backoff_base.count() <= 0) return;
    std::this_thread::sleep_for(config_.backoff_base * (1LL << std::min(attempt - 1, 16)));
  }

  std::optional<std::string> lookup(const std::string& digest) {
    {
      std::shared_lock lock(memory_mutex_);
      if (auto it = memory_.find(digest); it != memory_.end()) return it->second;
    }
    if (disk_) {
      if (auto text = disk_->get(digest)) {
        std::unique_lock lock(memory_mutex_);
        memory_.emplace(digest, *text);
        return text;
      }
    }
    return std::nullopt;
  }

  void store(const std::string& digest, const std::string& text, const GenerationRequest& request) {
    if (disk_) disk_->put(digest, text, request);
    std::unique_lock lock(memory_mutex_);
    memory_.insert_or_assign(digest, text);
  }

  std::shared_ptr<Transport> transport_;
  ClientConfig config_;
  std::counting_semaphore<> in_flight_;
  std::optional<ResponseCache> disk_;
  std::shared_mutex memory_mutex_;
  std::unordered_map<std::string, std::string> memory_;
  std::atomic<std::uint64_t> transport_calls_{0};
};

// ---------------- replay ----------------

// Offline backend answering from canned completions keyed by prompt digest.
// File format: JSON lines {"prompt_digest": "...", "completion": "..."}; an
// optional "note" field is ignored.
class ReplayTransport : public Transport {
 public:
  ReplayTransport() = default;

  static std::shared_ptr<ReplayTransport> load(const std::filesystem::path& file) {
    std::ifstream in(file, std::ios::binary);
    if (!in) throw ConfigError("replay file not found: " + file.string());
    auto replay = std::make_shared<ReplayTransport>();
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      if (ragjudge::detail::trim(line).empty()) continue;
      const auto rec = json::parse(line, nullptr, false);
      if (rec.is_discarded() || !rec.contains("prompt_digest") || !rec.contains("completion")) {
        throw ConfigError("replay file " + file.string() + " line " + std::to_string(line_no) + ": malformed record");
      }
      replay->add_digest(rec["prompt_digest"].get<std::string>(), rec["completion"].get<std::string>());
    }
    return replay;
  }

  void add(std::string_view system_text, std::string_view user_text, std::string completion) {
    add_digest(prompt_digest(system_text, user_text), std::move(completion));
  }

  void add_digest(std::string digest, std::string completion) {
    std::unique_lock lock(mutex_);
    canned_.insert_or_assign(std::move(digest), std::move(completion));
  }

  std::size_t size() const {
    std::shared_lock lock(mutex_);
    return canned_.size();
  }

  std::string complete(const GenerationRequest& request) override {
    const auto digest = prompt_digest(request);
    std::shared_lock lock(mutex_);
    auto it = canned_.find(digest);
    if (it == canned_.end()) throw BackendError("replay: no canned completion for prompt " + digest, 404);
    return it->second;
  }

  std::string describe() const override { return "replay"; }

  // Records are written sorted by digest so the file is stable.
  void save(const std::filesystem::path& file) const {
    std::shared_lock lock(mutex_);
    std::vector<std::pair<std::string, std::string>> rows(canned_.begin(), canned_.end());
    std::sort(rows.begin(), rows.end());
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    for (const auto& [digest, completion] : rows) {
      out << json{{"prompt_digest", digest}, {"completion", completion}}.dump() << '\n';
    }
  }

 private:
  mutable std::shared_mutex mutex_;
  std::unordered_map<std::string, std::string> canned_;
};

// Passes calls through to another transport and remembers every completion so
// a live run can be saved as a replay file.
class RecordingTransport : public Transport {
 public:
  explicit RecordingTransport(std::shared_ptr<Transport> inner)
      : inner_(std::move(inner)), log_(std::make_shared<ReplayTransport>()) {}

  std::string complete(const GenerationRequest& request) override {
    auto text = inner_->complete(request);
    log_->add(request.system_text.value_or(""), request.user_text, text);
    return text;
  }

  std::string describe() const override { return "recording(" + inner_->describe() + ")"; }
  const ReplayTransport& recorded() const { return *log_; }

 private:
  std::shared_ptr<Transport> inner_;
  std::shared_ptr<ReplayTransport> log_;
};

}  // namespace ragjudge::backend
