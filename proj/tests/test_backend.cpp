// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <thread>

#include "fixtures.hpp"
#include "ragjudge/ragjudge.hpp"

using namespace ragjudge;
using namespace ragjudge::backend;
namespace fs = std::filesystem;

namespace {

ClientConfig fast(int retries = 3) {
  ClientConfig c;
  c.max_retries = retries;
  c.backoff_base = std::chrono::milliseconds(0);
  return c;
}

GenerationRequest req(std::string user) {
  GenerationRequest r;
  r.model_id = "judge";
  r.user_text = std::move(user);
  return r;
}

fs::path fresh_dir(const std::string& name) {
  auto d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  return d;
}

}  // namespace

TEST(Client, RetriesTransientErrors) {
  auto t = std::make_shared<fixtures::ScriptedTransport>([](const GenerationRequest&, int call) -> std::string {
    if (call == 1) throw BackendError("busy", 503);
    if (call == 2) throw NetworkError("reset");
    return "ok";
  });
  Client client(t, fast());
  const auto r = client.generate(req("hello"));
  EXPECT_EQ(r.text, "ok");
  EXPECT_EQ(r.attempt_count, 3);
  EXPECT_FALSE(r.cached);
}

TEST(Client, GivesUpAfterRetryLimit) {
  auto t = std::make_shared<fixtures::ScriptedTransport>(
      [](const GenerationRequest&, int) -> std::string { throw BackendError("rate", 429); });
  Client client(t, fast(2));
  EXPECT_THROW(client.generate(req("x")), BackendError);
  EXPECT_EQ(t->calls(), 3);
}

TEST(Client, PermanentErrorsAreNotRetried) {
  auto t = std::make_shared<fixtures::ScriptedTransport>(
      [](const GenerationRequest&, int) -> std::string { throw BackendError("bad request", 400); });
  Client client(t, fast());
  try {
    client.generate(req("x"));
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status, 400);
  }
  EXPECT_EQ(t->calls(), 1);
}

TEST(Client, EmptyCompletion) {
  auto t = std::make_shared<fixtures::ScriptedTransport>([](const GenerationRequest&, int) { return std::string(" \n"); });
  Client client(t, fast());
  EXPECT_THROW(client.generate(req("x")), EmptyCompletion);
}

TEST(Client, InvalidRequest) {
  auto t = std::make_shared<fixtures::ScriptedTransport>([](const GenerationRequest&, int) { return std::string("x"); });
  Client client(t, fast());
  auto r = req("x");
  r.temperature = -1;
  EXPECT_THROW(client.generate(r), std::invalid_argument);
  EXPECT_THROW(Client(nullptr), std::invalid_argument);
}

TEST(Client, MemoryCacheAvoidsSecondCall) {
  auto t = std::make_shared<fixtures::ScriptedTransport>(
      [](const GenerationRequest& r, int call) { return r.user_text + "#" + std::to_string(call); });
  Client client(t, fast());
  const auto a = client.generate(req("same"));
  const auto b = client.generate(req("same"));
  EXPECT_EQ(a.text, b.text);
  EXPECT_TRUE(b.cached);
  EXPECT_EQ(b.attempt_count, 1);
  EXPECT_EQ(client.transport_calls(), 1u);
  client.generate(req("other"));
  EXPECT_EQ(client.transport_calls(), 2u);
}

TEST(Client, DigestCoversEveryResultRelevantField) {
  const auto base = req("u");
  auto variants = std::vector<GenerationRequest>(6, base);
  variants[0].model_id = "other";
  variants[1].system_text = "sys";
  variants[2].user_text = "v";
  variants[3].temperature = 0.0;
  variants[4].schema = schema::correctness_schema();
  variants[5].seed = 1;
  std::set<std::string> digests{request_digest(base)};
  for (const auto& v : variants) digests.insert(request_digest(v));
  EXPECT_EQ(digests.size(), 7u);
  EXPECT_EQ(request_digest(base), request_digest(req("u")));
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST(Client, DiskCacheSurvivesRestart) {
  const auto dir = fresh_dir("ragjudge_cache_test");
  auto t = std::make_shared<fixtures::ScriptedTransport>(
      [](const GenerationRequest&, int call) { return "reply " + std::to_string(call) + "\nsecond line"; });
  auto cfg = fast();
  cfg.cache_dir = dir;
  {
    Client first(t, cfg);
    EXPECT_EQ(first.generate(req("q")).text, "reply 1\nsecond line");
  }
  Client second(t, cfg);
  const auto r = second.generate(req("q"));
  EXPECT_EQ(r.text, "reply 1\nsecond line");
  EXPECT_TRUE(r.cached);
  EXPECT_EQ(t->calls(), 1);

  ResponseCache cache(dir);
  const auto meta = cache.metadata(request_digest(req("q")));
  ASSERT_TRUE(meta);
  EXPECT_EQ((*meta)["model"], "judge");
  fs::remove_all(dir);
}

TEST(Client, ConcurrencyBoundAndSharedCache) {
  std::atomic<int> in_flight{0}, peak{0};
  auto t = std::make_shared<fixtures::ScriptedTransport>([&](const GenerationRequest& r, int) {
    const int now = ++in_flight;
    int seen = peak.load();
    while (now > seen && !peak.compare_exchange_weak(seen, now)) {
    }
    std::this_thread::sleep_for(std::chrono::milliseconds(5));
    --in_flight;
    return "echo:" + r.user_text;
  });
  auto cfg = fast();
  cfg.max_in_flight = 2;
  Client client(t, cfg);
  std::vector<std::jthread> threads;
  for (int i = 0; i < 8; ++i) {
    threads.emplace_back([&, i] {
      for (int k = 0; k < 5; ++k) EXPECT_EQ(client.generate(req(std::to_string(i))).text, "echo:" + std::to_string(i));
    });
  }
  threads.clear();
  EXPECT_LE(peak.load(), 2);
  EXPECT_LE(client.transport_calls(), 8u * 5u);
}

TEST(Client, ConstrainedRepairsThenFails) {
  auto t = std::make_shared<fixtures::ScriptedTransport>(
      [](const GenerationRequest&, int call) { return R"({"TP":[0],"FP":[],"FN":[)" + std::to_string(call) + "]}"; });
  auto cfg = fast();
  cfg.repair_attempts = 2;
  Client client(t, cfg);
  auto r = req("structure this");
  r.schema = schema::correctness_schema();
  EXPECT_THROW(client.generate_constrained(r), SchemaViolation);
  EXPECT_EQ(t->calls(), 3);
  const auto reqs = t->requests();
  EXPECT_NE(reqs[1].user_text.find("minimum"), std::string::npos);
  EXPECT_THROW(client.generate_constrained(req("no schema")), std::invalid_argument);
}

TEST(Client, ExtractJson) {
  EXPECT_EQ(extract_json("```json\n{\"a\": 1}\n```")->second, json({{"a", 1}}));
  EXPECT_EQ(extract_json("Here: {\"a\": [1]} done")->second, json({{"a", {1}}}));
  EXPECT_FALSE(extract_json("no json"));
}

TEST(Replay, LoadSaveAndMiss) {
  const auto dir = fresh_dir("ragjudge_replay_test");
  fs::create_directories(dir);
  ReplayTransport replay;
  replay.add("", "prompt one", "answer one");
  replay.add("sys", "prompt two", "answer two");
  replay.save(dir / "r.jsonl");
  const auto loaded = ReplayTransport::load(dir / "r.jsonl");
  EXPECT_EQ(loaded->size(), 2u);
  EXPECT_EQ(loaded->complete(req("prompt one")), "answer one");
  auto two = req("prompt two");
  two.system_text = "sys";
  EXPECT_EQ(loaded->complete(two), "answer two");
  try {
    loaded->complete(req("unknown"));
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status, 404);
  }
  std::ofstream(dir / "bad.jsonl") << "{\"prompt_digest\": \"x\"}\n";
  EXPECT_THROW(ReplayTransport::load(dir / "bad.jsonl"), ConfigError);
  EXPECT_THROW(ReplayTransport::load(dir / "missing.jsonl"), ConfigError);
  fs::remove_all(dir);
}

TEST(Replay, RecordingCapturesLiveCalls) {
  auto inner = std::make_shared<fixtures::ScriptedTransport>(
      [](const GenerationRequest& r, int) { return "live:" + r.user_text; });
  auto rec = std::make_shared<RecordingTransport>(inner);
  Client client(rec, fast());
  client.generate(req("a"));
  client.generate(req("b"));
  EXPECT_EQ(rec->recorded().size(), 2u);
  EXPECT_EQ(const_cast<ReplayTransport&>(rec->recorded()).complete(req("b")), "live:b");
}

TEST(Http, ParseEndpoint) {
  const auto u = parse_endpoint("http://localhost:8080/v1/");
  EXPECT_EQ(u.scheme_host_port, "http://localhost:8080");
  EXPECT_EQ(u.base_path, "/v1");
  EXPECT_EQ(parse_endpoint("http://h").base_path, "");
  EXPECT_THROW(parse_endpoint("localhost:8080"), ConfigError);
  EXPECT_THROW(parse_endpoint("ftp://h/"), ConfigError);
}

TEST(Http, BodyCarriesSchemaOnlyWhenNative) {
  auto r = req("u");
  r.schema = schema::faithfulness_schema();
  r.seed = 5;
  EXPECT_FALSE(chat_completion_body(r, false).contains("response_format"));
  const auto body = chat_completion_body(r, true);
  EXPECT_EQ(body["response_format"]["json_schema"]["schema"], *r.schema);
  EXPECT_EQ(body["seed"], 5);
  EXPECT_EQ(body["messages"].size(), 1u);
}

TEST(Http, RoundTripAgainstLocalServer) {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/chat/completions", [&](const httplib::Request& request, httplib::Response& response) {
    ++hits;
    const auto body = json::parse(request.body);
    if (body["messages"][0]["content"] == "fail") {
      response.status = 500;
      response.set_content("boom", "text/plain");
      return;
    }
    EXPECT_EQ(request.get_header_value("Authorization"), "Bearer secret");
    const json reply = {{"choices", {{{"message", {{"role", "assistant"}, {"content", "judge says hi"}}}}}}};
    response.set_content(reply.dump(), "application/json");
  });
  const int port = server.bind_to_any_port("127.0.0.1");
  std::jthread runner([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  auto transport = std::make_shared<HttpChatTransport>(
      HttpConfig{"http://127.0.0.1:" + std::to_string(port) + "/v1", "secret", std::chrono::seconds(5), false});
  Client client(transport, fast(1));
  EXPECT_EQ(client.generate(req("hello")).text, "judge says hi");
  try {
    client.generate(req("fail"));
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.status, 500);
  }
  EXPECT_EQ(hits.load(), 3);  // one success plus a failing call retried once
  server.stop();
}

TEST(Http, UnreachableEndpointIsNetworkError) {
  auto transport =
      std::make_shared<HttpChatTransport>(HttpConfig{"http://127.0.0.1:1/v1", "", std::chrono::seconds(2), false});
  Client client(transport, fast(1));
  EXPECT_THROW(client.generate(req("x")), NetworkError);
}
