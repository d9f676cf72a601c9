#include "recut/reward.hpp"

#include <vector>

#include "recut/answer.hpp"

namespace recut {

namespace {

constexpr std::string_view kBoxed = "\\boxed{";
constexpr std::string_view kAnswerPrefix = "Answer:";

std::string_view ltrim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  return s;
}

// Visits each line of `text` without copying.
template <typename Fn>
void for_each_line(std::string_view text, Fn&& fn) {
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      fn(text.substr(start));
      break;
    }
    fn(text.substr(start, end - start));
    start = end + 1;
  }
}

}  // namespace

bool contains_answer_marker(std::string_view text) {
  if (text.find(kBoxed) != std::string_view::npos) return true;
  bool found = false;
  for_each_line(text, [&](std::string_view line) {
    if (!found && ltrim(line).substr(0, kAnswerPrefix.size()) == kAnswerPrefix) found = true;
  });
  return found;
}

std::optional<std::string> extract_answer_from_text(std::string_view text) {
  // Last \boxed{...} with balanced braces wins.
  size_t pos = text.rfind(kBoxed);
  if (pos != std::string_view::npos) {
    int depth = 0;
    for (size_t i = pos + kBoxed.size() - 1; i < text.size(); ++i) {
      if (text[i] == '{') ++depth;
      if (text[i] == '}' && --depth == 0)
        return std::string(text.substr(pos + kBoxed.size(), i - pos - kBoxed.size()));
    }
    // Unbalanced occurrence: fall through to the Answer: rule.
  }

  std::optional<std::string> answer;
  for_each_line(text, [&](std::string_view line) {
    std::string_view t = ltrim(line);
    if (t.substr(0, kAnswerPrefix.size()) == kAnswerPrefix) {
      std::string_view rest = t.substr(kAnswerPrefix.size());
      while (!rest.empty() && rest.front() == ' ') rest.remove_prefix(1);
      answer = std::string(rest);  // last matching line wins
    }
  });
  return answer;
}

std::optional<std::string> extract_final_answer(const Trajectory& traj) {
  return extract_answer_from_text(traj.text());
}

Verdict grade(const std::optional<std::string>& extracted, std::string_view gold) {
  if (!extracted) return Verdict{false, "no-answer"};
  std::string canon = normalize_answer(*extracted);
  if (!answers_match(canon, gold)) return Verdict{false, "mismatch"};
  return Verdict{true, canon == gold ? "exact" : "rational-equal"};
}

Reward score(const Trajectory& traj, std::string_view gold, const TokenCounter& counter) {
  Verdict v = grade(extract_final_answer(traj), gold);
  std::int64_t tokens = counter.count(traj.text());
  Reward r;
  r.correct = v.correct;
  r.token_count = tokens;
  r.value = (v.correct ? 1.0 : -1.0) / static_cast<double>(tokens);
  return r;
}

}  // namespace recut
