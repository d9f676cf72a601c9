#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "recut/types.hpp"

namespace recut {

// Chain-arithmetic task: start value, then k operations applied in order.
// The question text is the single source of truth; the simulated reasoner
// re-parses it, so text and structure can never drift apart.
struct SyntheticTask {
  enum class OpKind { add, subtract, multiply };
  struct Op {
    OpKind kind;
    std::int64_t operand;
  };

  std::int64_t start = 0;
  std::vector<Op> ops;

  std::int64_t gold() const;
  std::string question_text() const;

  static std::optional<SyntheticTask> parse(std::string_view question_text);
};

std::int64_t apply_op(std::int64_t value, const SyntheticTask::Op& op);

struct SyntheticDataset {
  std::string provenance;  // e.g. "synthetic-v1"
  int k_steps = 0;
  double epsilon = 0.0;  // recommended simulator corruption rate
  double rho = 0.0;      // recommended simulator correction rate
  std::uint64_t seed = 0;
  std::vector<Question> questions;
};

// Deterministic chain-arithmetic questions with known gold answers.
// count >= 1, k_steps >= 1, epsilon/rho in [0,1]; violations -> ConfigError.
SyntheticDataset make_synthetic(int count, int k_steps, double epsilon, double rho,
                                std::uint64_t seed, std::string id_prefix = "syn");

}  // namespace recut
