#include "recut/tokens.hpp"

#include <cctype>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "recut/errors.hpp"
#include "recut/hash.hpp"

namespace recut {

TokenCounter TokenCounter::from_count_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open token count file: " + path);
  auto table = std::make_shared<std::unordered_map<std::string, std::int64_t>>();
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json row = nlohmann::json::parse(line, nullptr, false);
    if (row.is_discarded() || !row.contains("sha256") || !row.contains("tokens"))
      throw ConfigError("bad token count row at " + path + ":" + std::to_string(lineno));
    (*table)[row["sha256"].get<std::string>()] = row["tokens"].get<std::int64_t>();
  }
  TokenCounter c(TokenCounterMode::external_count_file);
  c.external_ = std::move(table);
  return c;
}

std::int64_t TokenCounter::count(std::string_view text) const {
  if (text.empty()) throw std::invalid_argument("count_tokens: empty text");
  switch (mode_) {
    case TokenCounterMode::whitespace: {
      std::int64_t n = 0;
      bool in_run = false;
      for (char c : text) {
        bool ws = std::isspace(static_cast<unsigned char>(c)) != 0;
        if (!ws && !in_run) ++n;
        in_run = !ws;
      }
      // Whitespace-only text still counts as one token so count >= 1 holds.
      return n > 0 ? n : 1;
    }
    case TokenCounterMode::bytes_div_4:
      return static_cast<std::int64_t>((text.size() + 3) / 4);
    case TokenCounterMode::external_count_file: {
      if (!external_) throw MissingTokenCount("external counter has no count table");
      auto it = external_->find(sha256_hex(text));
      if (it == external_->end())
        throw MissingTokenCount("no token count for content hash " + sha256_hex(text));
      return it->second;
    }
  }
  throw Error("unreachable token counter mode");
}

std::string_view token_counter_mode_name(TokenCounterMode m) {
  switch (m) {
    case TokenCounterMode::whitespace: return "whitespace";
    case TokenCounterMode::bytes_div_4: return "bytes-div-4";
    case TokenCounterMode::external_count_file: return "external-count-file";
  }
  return "whitespace";
}

TokenCounterMode token_counter_mode_from_name(std::string_view s) {
  if (s == "whitespace") return TokenCounterMode::whitespace;
  if (s == "bytes-div-4") return TokenCounterMode::bytes_div_4;
  if (s == "external-count-file") return TokenCounterMode::external_count_file;
  throw ConfigError("unknown token counter mode: " + std::string(s));
}

}  // namespace recut
