#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

namespace recut {

struct Question {
  std::string id;
  std::string text;
  std::string gold_answer;  // canonical form (see normalize_answer)
};

struct ReasoningStep {
  int index = 0;  // 0-based position within its trajectory
  std::string text;
};

// Which branch of the exploration emitted a trajectory.
enum class Provenance { long_branch, short_branch, optimal, vanilla };

std::string_view provenance_name(Provenance p);
std::optional<Provenance> provenance_from_name(std::string_view s);

struct Trajectory {
  std::string question_id;
  std::vector<ReasoningStep> steps;
  std::optional<std::string> final_answer;
  Provenance provenance = Provenance::vanilla;
  int created_at_step = 0;  // exploration step t at which it was emitted

  // Full trajectory text: step texts joined with single newlines. This is
  // the string that token counting, answer extraction, and the policy
  // tokenizer all operate on.
  std::string text() const;
};

// Builds a trajectory from step texts; indices are assigned by position and
// final_answer is populated iff the last step carries an answer marker.
Trajectory make_trajectory(std::string question_id, const std::vector<std::string>& step_texts,
                           Provenance provenance, int created_at_step);

struct Verdict {
  bool correct = false;
  std::string matched_form;  // which extraction/normalization rule fired
};

// Per-question accumulation of full trajectories. Insertion dedupes on
// whitespace-normalized text so degenerate preference pairs cannot form.
class CandidatePool {
 public:
  CandidatePool() = default;
  explicit CandidatePool(std::string question_id) : question_id_(std::move(question_id)) {}

  // Returns false (and drops the trajectory) when an equivalent one is
  // already pooled. Throws Error on question_id mismatch or empty steps.
  bool insert(Trajectory t);

  const std::string& question_id() const { return question_id_; }
  const std::vector<Trajectory>& trajectories() const { return trajectories_; }
  const std::optional<Trajectory>& optimal() const { return optimal_; }
  void set_optimal(Trajectory t);
  std::size_t size() const { return trajectories_.size(); }
  bool empty() const { return trajectories_.empty(); }

 private:
  std::string question_id_;
  std::vector<Trajectory> trajectories_;
  std::optional<Trajectory> optimal_;
  std::unordered_set<std::string> seen_;
};

// Whitespace-insensitive key used by pool dedup: runs of whitespace collapse
// to one space, leading/trailing whitespace dropped.
std::string whitespace_normalize(std::string_view text);

}  // namespace recut
