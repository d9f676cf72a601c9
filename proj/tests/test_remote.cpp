#include <doctest.h>

#include <atomic>
#include <string>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "recut/errors.hpp"
#include "recut/remote_generator.hpp"

using namespace recut;

namespace {

nlohmann::json chat_reply(const std::string& content) {
  return nlohmann::json{
      {"choices", {{{"message", {{"role", "assistant"}, {"content", content}}}}}}};
}

struct TestServer {
  httplib::Server server;
  std::thread thread;
  int port = 0;

  explicit TestServer(std::function<void(const httplib::Request&, httplib::Response&)> handler) {
    server.Post("/v1/chat/completions",
                [handler = std::move(handler)](const httplib::Request& req, httplib::Response& res) {
                  handler(req, res);
                });
    port = server.bind_to_any_port("127.0.0.1");
    thread = std::thread([this] { server.listen_after_bind(); });
    server.wait_until_ready();
  }
  ~TestServer() {
    server.stop();
    thread.join();
  }
};

GenerationRequest sample_request() {
  GenerationRequest req;
  req.question.id = "q1";
  req.question.text = "Start with 2. Then add 2. What is the result?";
  req.variant = PromptCatalog::builtin().get(VariantKind::short_form);
  req.prefix_steps = {"Step 1: now 2 + 2 = 4."};
  req.temperature = 0.4;
  req.max_new_tokens = 128;
  req.seed = 77;
  return req;
}

RemoteConfig fast_config(int port) {
  RemoteConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
  cfg.model = "test-model";
  cfg.initial_backoff = std::chrono::milliseconds(1);
  return cfg;
}

}  // namespace

TEST_CASE("remote client sends an OpenAI-style chat completion request") {
  nlohmann::json seen;
  std::string auth;
  TestServer ts([&](const httplib::Request& req, httplib::Response& res) {
    seen = nlohmann::json::parse(req.body);
    auth = req.get_header_value("Authorization");
    res.set_content(chat_reply("Step 2: now 4 + 0 = 4.\nAnswer: \\boxed{4}").dump(),
                    "application/json");
  });

  setenv("RECUT_API_KEY", "sk-test-123", 1);
  RemoteGenerator gen(fast_config(ts.port));
  Continuation c = gen.generate(sample_request());

  CHECK(c.attempts == 1);
  CHECK(c.terminated);
  REQUIRE(c.segmented_steps.size() == 1);
  CHECK(seen["model"] == "test-model");
  CHECK(seen["temperature"] == doctest::Approx(0.4));
  CHECK(seen["max_tokens"] == 128);
  CHECK(seen["seed"] == 77);
  REQUIRE(seen["messages"].size() == 2);
  CHECK(seen["messages"][0]["role"] == "system");
  CHECK(seen["messages"][1]["role"] == "user");
  // Question and committed prefix ride in the user message.
  std::string user = seen["messages"][1]["content"];
  CHECK(user.find("Start with 2.") != std::string::npos);
  CHECK(user.find("Step 1: now 2 + 2 = 4.") != std::string::npos);
  CHECK(auth == "Bearer sk-test-123");
  unsetenv("RECUT_API_KEY");
}

TEST_CASE("retries recover from transient 5xx responses") {
  std::atomic<int> hits{0};
  TestServer ts([&](const httplib::Request&, httplib::Response& res) {
    int n = ++hits;
    if (n <= 2) {
      res.status = 500;
      res.set_content("boom", "text/plain");
      return;
    }
    res.set_content(chat_reply("Answer: \\boxed{4}").dump(), "application/json");
  });

  RemoteGenerator gen(fast_config(ts.port));
  Continuation c = gen.generate(sample_request());
  CHECK(c.attempts == 3);
  CHECK(hits == 3);
}

TEST_CASE("a persistent failure exhausts the retry budget") {
  std::atomic<int> hits{0};
  TestServer ts([&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 503;
  });
  RemoteGenerator gen(fast_config(ts.port));
  CHECK_THROWS_AS(gen.generate(sample_request()), GenerationError);
  CHECK(hits == 3);  // max_attempts
}

TEST_CASE("client errors do not retry") {
  std::atomic<int> hits{0};
  TestServer ts([&](const httplib::Request&, httplib::Response& res) {
    ++hits;
    res.status = 404;
  });
  RemoteGenerator gen(fast_config(ts.port));
  CHECK_THROWS_AS(gen.generate(sample_request()), GenerationError);
  CHECK(hits == 1);
}

TEST_CASE("empty completions surface as EmptyGeneration") {
  TestServer ts([&](const httplib::Request&, httplib::Response& res) {
    res.set_content(chat_reply("").dump(), "application/json");
  });
  RemoteGenerator gen(fast_config(ts.port));
  CHECK_THROWS_AS(gen.generate(sample_request()), EmptyGeneration);
}

TEST_CASE("endpoint is required up front") {
  RemoteConfig cfg;
  CHECK_THROWS_AS(RemoteGenerator{cfg}, ConfigError);
}
