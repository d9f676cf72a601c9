#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>

namespace recut {

enum class TokenCounterMode { whitespace, bytes_div_4, external_count_file };

// Token counting used for every |Y| in rewards, selection rules, and
// reports. whitespace counts maximal non-whitespace runs; bytes_div_4 is
// ceil(bytes/4); external_count_file looks up precomputed counts keyed by
// sha256 of the text (parity with a real tokenizer computed offline).
class TokenCounter {
 public:
  TokenCounter() : mode_(TokenCounterMode::whitespace) {}
  explicit TokenCounter(TokenCounterMode mode) : mode_(mode) {}

  // Loads an external-count JSONL file of {"sha256": hex, "tokens": int}.
  static TokenCounter from_count_file(const std::string& path);

  // Positive count for non-empty text; throws std::invalid_argument on
  // empty input and MissingTokenCount for unknown hashes in external mode.
  std::int64_t count(std::string_view text) const;

  TokenCounterMode mode() const { return mode_; }

 private:
  TokenCounterMode mode_;
  std::shared_ptr<const std::unordered_map<std::string, std::int64_t>> external_;
};

std::string_view token_counter_mode_name(TokenCounterMode m);
TokenCounterMode token_counter_mode_from_name(std::string_view s);

}  // namespace recut
