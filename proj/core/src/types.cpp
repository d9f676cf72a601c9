#include "recut/types.hpp"

#include <cctype>

#include "recut/errors.hpp"
#include "recut/reward.hpp"

namespace recut {

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::long_branch: return "long-branch";
    case Provenance::short_branch: return "short-branch";
    case Provenance::optimal: return "optimal";
    case Provenance::vanilla: return "vanilla";
  }
  return "vanilla";
}

std::optional<Provenance> provenance_from_name(std::string_view s) {
  if (s == "long-branch") return Provenance::long_branch;
  if (s == "short-branch") return Provenance::short_branch;
  if (s == "optimal") return Provenance::optimal;
  if (s == "vanilla") return Provenance::vanilla;
  return std::nullopt;
}

std::string Trajectory::text() const {
  std::string out;
  for (size_t i = 0; i < steps.size(); ++i) {
    if (i) out += '\n';
    out += steps[i].text;
  }
  return out;
}

Trajectory make_trajectory(std::string question_id, const std::vector<std::string>& step_texts,
                           Provenance provenance, int created_at_step) {
  if (step_texts.empty()) throw Error("trajectory requires at least one step");
  Trajectory t;
  t.question_id = std::move(question_id);
  t.provenance = provenance;
  t.created_at_step = created_at_step;
  t.steps.reserve(step_texts.size());
  for (size_t i = 0; i < step_texts.size(); ++i)
    t.steps.push_back(ReasoningStep{static_cast<int>(i), step_texts[i]});
  if (contains_answer_marker(t.steps.back().text))
    t.final_answer = extract_answer_from_text(t.steps.back().text);
  return t;
}

std::string whitespace_normalize(std::string_view text) {
  std::string out;
  out.reserve(text.size());
  bool in_ws = false;
  for (char c : text) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      in_ws = true;
      continue;
    }
    if (in_ws && !out.empty()) out += ' ';
    in_ws = false;
    out += c;
  }
  return out;
}

bool CandidatePool::insert(Trajectory t) {
  if (t.steps.empty()) throw Error("cannot pool a trajectory with no steps");
  if (question_id_.empty()) question_id_ = t.question_id;
  if (t.question_id != question_id_)
    throw Error("pool for " + question_id_ + " rejects trajectory for " + t.question_id);
  std::string key = whitespace_normalize(t.text());
  if (!seen_.insert(std::move(key)).second) return false;
  trajectories_.push_back(std::move(t));
  return true;
}

void CandidatePool::set_optimal(Trajectory t) {
  insert(t);  // idempotent; the optimal row also lives in the pool
  optimal_ = std::move(t);
}

}  // namespace recut
