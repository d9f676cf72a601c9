#pragma once

#include <cstdint>

#include "recut/generator.hpp"
#include "recut/synthetic.hpp"

namespace recut {

// Behaviour of the seeded stand-in reasoner. Each computation step is
// corrupted with probability epsilon (the stated value drifts off by a
// small offset and is marked with '~'); under the long/vanilla instruction
// every computation is followed by a verification step that repairs a
// corrupted value with probability rho.
struct SimConfig {
  double epsilon = 0.0;
  double rho = 0.0;
};

// Deterministic reasoner over chain-arithmetic questions. Output is a pure
// function of (question text, prefix, instruction kind, seed); temperature
// is accepted but ignored, all variation rides on the seed stream. The long
// register writes wordy computation plus verification steps (about twice
// the tokens of the short register); the short register writes bare
// arithmetic lines. Both end with an 'Answer: \boxed{...}' line.
class SimulatedReasoner : public Generator {
 public:
  explicit SimulatedReasoner(SimConfig cfg) : cfg_(cfg) {}

  Continuation generate(const GenerationRequest& req) override;
  std::string name() const override { return "sim"; }

  // From-scratch solve of a task; equivalent to generate() with an empty
  // prefix and a question built from the task.
  Continuation simulate(const SyntheticTask& task, VariantKind kind, std::uint64_t seed) const;

  const SimConfig& config() const { return cfg_; }

 private:
  SimConfig cfg_;
};

}  // namespace recut
