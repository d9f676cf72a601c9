#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "recut/generator.hpp"
#include "recut/reward.hpp"
#include "recut/tokens.hpp"
#include "recut/types.hpp"

namespace recut {

struct ExplorerConfig {
  int max_steps = 8;
  TokenCounter counter;
  double exploration_temperature = 0.7;
  int max_new_tokens = 1024;
  std::uint64_t seed = 0;
  bool concurrent_branches = true;  // run the two per-step generations in parallel
};

// One exploration step: both full candidates, their rewards, and which
// branch supplied the committed step. Ties go to the short branch.
struct StepTrace {
  int step = 0;  // 1-based exploration step t
  Trajectory long_candidate;
  Trajectory short_candidate;
  Reward long_reward;
  Reward short_reward;
  VariantKind chosen = VariantKind::short_form;
  std::string chosen_step_text;
};

struct ExplorationResult {
  CandidatePool pool;
  std::optional<Trajectory> optimal;  // absent only for aborted runs
  std::vector<StepTrace> traces;
  bool aborted = false;
  std::string abort_reason;
};

// Stepwise loop: per step sample one long and one short continuation from
// the committed prefix, pool both full candidates, commit the first step of
// the higher-reward one, stop on an answer marker or at max_steps. The
// final committed trajectory is pooled with provenance=optimal. Generator
// failure aborts and returns the partial state instead of throwing.
ExplorationResult explore(const Question& question, Generator& gen, const PromptCatalog& prompts,
                          const ExplorerConfig& cfg);

// Continues an exploration from previously persisted traces. With identical
// generator seeding the completed result equals an uninterrupted run.
ExplorationResult resume(const Question& question, Generator& gen, const PromptCatalog& prompts,
                         const ExplorerConfig& cfg, const std::vector<StepTrace>& prior_traces);

// Trace row wire format (one JSON object per line in trace.jsonl).
nlohmann::json step_trace_to_json(const StepTrace& t, const std::string& question_id);
StepTrace step_trace_from_json(const nlohmann::json& j);

}  // namespace recut
