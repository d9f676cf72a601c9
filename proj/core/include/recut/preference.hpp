#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "recut/generator.hpp"
#include "recut/reward.hpp"
#include "recut/tokens.hpp"
#include "recut/types.hpp"

namespace recut {

enum class PairTag { acc, len, direct };

std::string_view pair_tag_name(PairTag t);
PairTag pair_tag_from_name(std::string_view s);

// (question, chosen, rejected) with full trajectory texts carried inline.
struct PreferencePair {
  std::string question_id;
  std::string prompt;  // question text
  Trajectory chosen;
  Trajectory rejected;
  PairTag tag = PairTag::acc;
};

struct PreferenceDataset {
  PairTag tag = PairTag::acc;
  std::vector<PreferencePair> pairs;
  std::map<std::string, int> skip_counts;  // reason -> questions skipped
};

// A pool member with its grade; selection rules all read from this view.
struct ScoredTrajectory {
  const Trajectory* traj = nullptr;
  bool correct = false;
  std::int64_t tokens = 0;
  double reward = 0.0;
};

std::vector<ScoredTrajectory> score_pool(const CandidatePool& pool, std::string_view gold,
                                         const TokenCounter& counter);

// Shortest correct trajectory; ties by earliest created_at_step, then
// short-branch provenance, then pool order. Absent when nothing is correct.
std::optional<Trajectory> select_positive(const CandidatePool& pool, std::string_view gold,
                                          const TokenCounter& counter);

struct NegativeSelection {
  std::optional<Trajectory> acc;  // longest incorrect
  std::optional<Trajectory> len;  // longest correct, strictly longer than the positive
};
NegativeSelection select_negatives(const CandidatePool& pool, std::string_view gold,
                                   const TokenCounter& counter);

// Highest Eq.-style reward overall; ties by earliest created_at_step.
std::optional<Trajectory> select_sft_best(const CandidatePool& pool, std::string_view gold,
                                          const TokenCounter& counter);

struct BuiltDatasets {
  PreferenceDataset acc;
  PreferenceDataset len;
};

// One pair per question per dataset; both datasets share the positive.
BuiltDatasets build_datasets(const std::vector<CandidatePool>& pools,
                             const std::vector<Question>& questions, const TokenCounter& counter);

// Direct baseline: n vanilla samples, one (shortest-correct, longest-incorrect)
// pair when both sides exist.
std::optional<PreferencePair> build_direct_dpo(const Question& question, Generator& gen,
                                               const PromptCatalog& prompts, int n,
                                               std::uint64_t seed, const TokenCounter& counter,
                                               std::map<std::string, int>* skip_counts = nullptr);

// Preference JSONL row:
//   {"question_id": str, "prompt": str, "chosen": str, "rejected": str, "tag": str}
nlohmann::json pair_to_json(const PreferencePair& p);

struct FlatPair {
  std::string question_id;
  std::string prompt;
  std::string chosen;
  std::string rejected;
  PairTag tag;
};
FlatPair pair_from_json(const nlohmann::json& j);

void write_pairs(const std::vector<PreferencePair>& pairs, const std::string& path);
std::vector<FlatPair> read_pairs(const std::string& path);

}  // namespace recut
