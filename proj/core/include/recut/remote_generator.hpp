#pragma once

#include <chrono>
#include <memory>
#include <string>

#include "recut/generator.hpp"

namespace recut {

struct RemoteConfig {
  std::string base_url;          // e.g. http://localhost:8000
  std::string model;             // model name sent in the request body
  std::string api_key_env = "RECUT_API_KEY";
  int max_attempts = 3;          // retry transport errors and HTTP 429/5xx
  std::chrono::milliseconds initial_backoff{500};  // doubles per retry
  int max_in_flight = 4;         // cap on concurrent requests
  std::chrono::seconds timeout{120};
};

// OpenAI-compatible chat-completions client. The instruction preamble rides
// as the system message; question plus committed prefix form the user
// message. Responses are segmented exactly like local generations.
class RemoteGenerator : public Generator {
 public:
  explicit RemoteGenerator(RemoteConfig cfg);
  ~RemoteGenerator() override;

  Continuation generate(const GenerationRequest& req) override;
  std::string name() const override { return "remote"; }

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace recut
