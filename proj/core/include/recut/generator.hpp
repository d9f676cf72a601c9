#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recut/prompts.hpp"
#include "recut/types.hpp"

namespace recut {

struct GenerationRequest {
  Question question;
  std::vector<std::string> prefix_steps;  // committed optimal prefix, possibly empty
  InstructionVariant variant;
  int max_new_tokens = 1024;
  double temperature = 0.7;
  std::optional<std::uint64_t> seed;
};

struct Continuation {
  std::string raw_text;
  std::vector<std::string> segmented_steps;
  bool terminated = false;  // an answer marker was produced
  int attempts = 1;         // transport attempts (remote client)
};

struct SegmentedText {
  std::vector<std::string> steps;
  bool terminated = false;
};

// Splits generator output into steps. Lines matching `Step <k>:`
// (case-insensitive) open a new segment that runs until the next marker;
// text before the first marker forms its own segment. Without any marker,
// blank-line boundaries split paragraphs, and a final paragraph that is
// only an answer line attaches to the paragraph before it. terminated is
// true iff the final segment carries an answer marker.
SegmentedText segment_steps(std::string_view raw_text);

// Text-generation boundary. Implementations: SimulatedReasoner (seeded,
// pure) and RemoteGenerator (OpenAI-compatible chat completions).
class Generator {
 public:
  virtual ~Generator() = default;

  // Returns a segmented continuation; throws EmptyGeneration when the
  // implementation produced no usable text for this attempt.
  virtual Continuation generate(const GenerationRequest& req) = 0;

  virtual std::string name() const = 0;
};

// Shared tail of every generate(): segment, validate, flag termination.
Continuation finish_continuation(std::string raw_text, int attempts);

}  // namespace recut
