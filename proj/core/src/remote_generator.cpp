#include "recut/remote_generator.hpp"

#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <thread>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "recut/errors.hpp"

namespace recut {

namespace {

// host[:port] with optional scheme; httplib clients take the origin only.
struct ParsedUrl {
  std::string origin;
  std::string path_prefix;
};

ParsedUrl parse_base_url(const std::string& url) {
  ParsedUrl out;
  size_t scheme = url.find("://");
  size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  size_t slash = url.find('/', host_start);
  if (slash == std::string::npos) {
    out.origin = url;
  } else {
    out.origin = url.substr(0, slash);
    out.path_prefix = url.substr(slash);
    while (!out.path_prefix.empty() && out.path_prefix.back() == '/') out.path_prefix.pop_back();
  }
  return out;
}

}  // namespace

struct RemoteGenerator::Impl {
  RemoteConfig cfg;
  ParsedUrl url;
  std::string api_key;

  // Counting gate for max_in_flight; plain mutex+cv keeps it portable.
  std::mutex mu;
  std::condition_variable cv;
  int in_flight = 0;

  explicit Impl(RemoteConfig c) : cfg(std::move(c)), url(parse_base_url(cfg.base_url)) {
    if (cfg.base_url.empty()) throw ConfigError("remote generator requires an endpoint URL");
    if (const char* key = std::getenv(cfg.api_key_env.c_str())) api_key = key;
  }

  struct Gate {
    Impl& impl;
    explicit Gate(Impl& i) : impl(i) {
      std::unique_lock lock(impl.mu);
      impl.cv.wait(lock, [&] { return impl.in_flight < impl.cfg.max_in_flight; });
      ++impl.in_flight;
    }
    ~Gate() {
      {
        std::lock_guard lock(impl.mu);
        --impl.in_flight;
      }
      impl.cv.notify_one();
    }
  };
};

RemoteGenerator::RemoteGenerator(RemoteConfig cfg) : impl_(std::make_unique<Impl>(std::move(cfg))) {}
RemoteGenerator::~RemoteGenerator() = default;

Continuation RemoteGenerator::generate(const GenerationRequest& req) {
  Impl::Gate gate(*impl_);

  RenderedPrompt prompt = render_prompt(req.variant, req.question, req.prefix_steps);
  nlohmann::json body;
  body["model"] = impl_->cfg.model;
  body["messages"] = nlohmann::json::array({
      nlohmann::json{{"role", "system"}, {"content", prompt.system}},
      nlohmann::json{{"role", "user"}, {"content", prompt.user}},
  });
  body["temperature"] = req.temperature;
  body["max_tokens"] = req.max_new_tokens;
  if (req.seed) body["seed"] = *req.seed;
  std::string payload = body.dump();

  httplib::Client client(impl_->url.origin);
  client.set_connection_timeout(impl_->cfg.timeout);
  client.set_read_timeout(impl_->cfg.timeout);
  httplib::Headers headers;
  if (!impl_->api_key.empty()) headers.emplace("Authorization", "Bearer " + impl_->api_key);

  const std::string path = impl_->url.path_prefix + "/v1/chat/completions";
  std::string last_error;
  auto backoff = impl_->cfg.initial_backoff;
  for (int attempt = 1; attempt <= impl_->cfg.max_attempts; ++attempt) {
    if (attempt > 1) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto res = client.Post(path, headers, payload, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;  // retryable
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;  // retryable
    }
    if (res->status != 200)
      throw GenerationError("chat completion failed with HTTP " + std::to_string(res->status) +
                            ": " + res->body);
    nlohmann::json reply = nlohmann::json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("choices") || reply["choices"].empty())
      throw GenerationError("malformed chat completion response");
    std::string text = reply["choices"][0].value("message", nlohmann::json::object())
                           .value("content", std::string());
    if (text.empty()) throw EmptyGeneration("remote generator returned empty text");
    return finish_continuation(std::move(text), attempt);
  }
  throw GenerationError("chat completion failed after " +
                        std::to_string(impl_->cfg.max_attempts) + " attempts; last: " + last_error);
}

}  // namespace recut
