#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

#include "recut/tokens.hpp"
#include "recut/types.hpp"

namespace recut {

// Length-aware correctness reward: +1/|Y| when the extracted answer matches
// gold, -1/|Y| otherwise. Correct always outranks incorrect; among correct,
// shorter wins; among incorrect, longer is less penalized.
struct Reward {
  double value = 0.0;
  bool correct = false;
  std::int64_t token_count = 0;
};

// True iff the text contains \boxed{ or a line whose trimmed form starts
// with "Answer:".
bool contains_answer_marker(std::string_view text);

// Content of the LAST \boxed{...} (balanced braces); failing that, the
// remainder of the LAST line beginning "Answer:"; otherwise nullopt.
std::optional<std::string> extract_answer_from_text(std::string_view text);

std::optional<std::string> extract_final_answer(const Trajectory& traj);

// Grades an extracted (raw) answer against a canonical gold answer.
Verdict grade(const std::optional<std::string>& extracted, std::string_view gold);

Reward score(const Trajectory& traj, std::string_view gold, const TokenCounter& counter);

}  // namespace recut
