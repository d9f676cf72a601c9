#include "recut/preference.hpp"

#include <unordered_map>

#include "recut/errors.hpp"
#include "recut/jsonl.hpp"
#include "recut/rng.hpp"

namespace recut {

std::string_view pair_tag_name(PairTag t) {
  switch (t) {
    case PairTag::acc: return "acc";
    case PairTag::len: return "len";
    case PairTag::direct: return "direct";
  }
  return "acc";
}

PairTag pair_tag_from_name(std::string_view s) {
  if (s == "acc") return PairTag::acc;
  if (s == "len") return PairTag::len;
  if (s == "direct") return PairTag::direct;
  throw Error("unknown pair tag: " + std::string(s));
}

std::vector<ScoredTrajectory> score_pool(const CandidatePool& pool, std::string_view gold,
                                         const TokenCounter& counter) {
  std::vector<ScoredTrajectory> out;
  out.reserve(pool.size());
  for (const auto& t : pool.trajectories()) {
    Reward r = score(t, gold, counter);
    out.push_back(ScoredTrajectory{&t, r.correct, r.token_count, r.value});
  }
  return out;
}

namespace {

// Shared argmin/argmax over scored views. `better(a, b)` returns true when
// a should replace b; pool order breaks any remaining ties, which keeps
// every selection invariant under pool reordering only up to the documented
// tie rules (earlier created_at_step first, then provenance preference).
template <typename Pred, typename Better>
const ScoredTrajectory* pick(const std::vector<ScoredTrajectory>& scored, Pred&& eligible,
                             Better&& better) {
  const ScoredTrajectory* best = nullptr;
  for (const auto& s : scored) {
    if (!eligible(s)) continue;
    if (!best || better(s, *best)) best = &s;
  }
  return best;
}

bool earlier_then_short(const ScoredTrajectory& a, const ScoredTrajectory& b) {
  if (a.traj->created_at_step != b.traj->created_at_step)
    return a.traj->created_at_step < b.traj->created_at_step;
  bool a_short = a.traj->provenance == Provenance::short_branch;
  bool b_short = b.traj->provenance == Provenance::short_branch;
  return a_short && !b_short;
}

}  // namespace

std::optional<Trajectory> select_positive(const CandidatePool& pool, std::string_view gold,
                                          const TokenCounter& counter) {
  auto scored = score_pool(pool, gold, counter);
  const ScoredTrajectory* best =
      pick(scored, [](const ScoredTrajectory& s) { return s.correct; },
           [](const ScoredTrajectory& a, const ScoredTrajectory& b) {
             if (a.tokens != b.tokens) return a.tokens < b.tokens;
             return earlier_then_short(a, b);
           });
  if (!best) return std::nullopt;
  return *best->traj;
}

NegativeSelection select_negatives(const CandidatePool& pool, std::string_view gold,
                                   const TokenCounter& counter) {
  auto scored = score_pool(pool, gold, counter);
  NegativeSelection out;

  auto longest = [](const ScoredTrajectory& a, const ScoredTrajectory& b) {
    if (a.tokens != b.tokens) return a.tokens > b.tokens;
    return earlier_then_short(a, b);
  };
  const ScoredTrajectory* acc =
      pick(scored, [](const ScoredTrajectory& s) { return !s.correct; }, longest);
  if (acc) out.acc = *acc->traj;

  // The length negative must be strictly longer than the positive so the
  // pair cannot degenerate to chosen == rejected.
  const ScoredTrajectory* pos =
      pick(scored, [](const ScoredTrajectory& s) { return s.correct; },
           [](const ScoredTrajectory& a, const ScoredTrajectory& b) {
             if (a.tokens != b.tokens) return a.tokens < b.tokens;
             return earlier_then_short(a, b);
           });
  if (pos) {
    const ScoredTrajectory* len = pick(
        scored,
        [&](const ScoredTrajectory& s) { return s.correct && s.tokens > pos->tokens; }, longest);
    if (len) out.len = *len->traj;
  }
  return out;
}

std::optional<Trajectory> select_sft_best(const CandidatePool& pool, std::string_view gold,
                                          const TokenCounter& counter) {
  auto scored = score_pool(pool, gold, counter);
  const ScoredTrajectory* best =
      pick(scored, [](const ScoredTrajectory&) { return true; },
           [](const ScoredTrajectory& a, const ScoredTrajectory& b) {
             if (a.reward != b.reward) return a.reward > b.reward;
             return a.traj->created_at_step < b.traj->created_at_step;
           });
  if (!best) return std::nullopt;
  return *best->traj;
}

BuiltDatasets build_datasets(const std::vector<CandidatePool>& pools,
                             const std::vector<Question>& questions,
                             const TokenCounter& counter) {
  std::unordered_map<std::string, const Question*> by_id;
  for (const auto& q : questions) by_id[q.id] = &q;

  BuiltDatasets out;
  out.acc.tag = PairTag::acc;
  out.len.tag = PairTag::len;

  for (const auto& pool : pools) {
    auto qit = by_id.find(pool.question_id());
    if (qit == by_id.end()) {
      out.acc.skip_counts["unknown-question"]++;
      out.len.skip_counts["unknown-question"]++;
      continue;
    }
    const Question& q = *qit->second;
    auto positive = select_positive(pool, q.gold_answer, counter);
    if (!positive) {
      out.acc.skip_counts["no-correct-trajectory"]++;
      out.len.skip_counts["no-correct-trajectory"]++;
      continue;
    }
    auto negatives = select_negatives(pool, q.gold_answer, counter);
    if (negatives.acc) {
      out.acc.pairs.push_back(
          PreferencePair{q.id, q.text, *positive, *negatives.acc, PairTag::acc});
    } else {
      out.acc.skip_counts["no-incorrect-trajectory"]++;
    }
    if (negatives.len) {
      out.len.pairs.push_back(
          PreferencePair{q.id, q.text, *positive, *negatives.len, PairTag::len});
    } else {
      out.len.skip_counts["no-longer-correct-trajectory"]++;
    }
  }
  return out;
}

std::optional<PreferencePair> build_direct_dpo(const Question& question, Generator& gen,
                                               const PromptCatalog& prompts, int n,
                                               std::uint64_t seed, const TokenCounter& counter,
                                               std::map<std::string, int>* skip_counts) {
  if (n < 2) throw ConfigError("direct preference sampling needs n >= 2");
  CandidatePool pool(question.id);
  for (int i = 0; i < n; ++i) {
    GenerationRequest req;
    req.question = question;
    req.variant = prompts.get(VariantKind::vanilla);
    req.seed = derive_seed(seed, question.id + "/direct/" + std::to_string(i));
    Continuation c = gen.generate(req);
    pool.insert(make_trajectory(question.id, c.segmented_steps, Provenance::vanilla, 0));
  }
  auto positive = select_positive(pool, question.gold_answer, counter);
  auto negatives = select_negatives(pool, question.gold_answer, counter);
  if (!positive || !negatives.acc) {
    if (skip_counts) (*skip_counts)[positive ? "all-correct" : "no-correct"]++;
    return std::nullopt;
  }
  return PreferencePair{question.id, question.text, *positive, *negatives.acc, PairTag::direct};
}

nlohmann::json pair_to_json(const PreferencePair& p) {
  nlohmann::json j;
  j["question_id"] = p.question_id;
  j["prompt"] = p.prompt;
  j["chosen"] = p.chosen.text();
  j["rejected"] = p.rejected.text();
  j["tag"] = std::string(pair_tag_name(p.tag));
  return j;
}

FlatPair pair_from_json(const nlohmann::json& j) {
  FlatPair p;
  p.question_id = j.at("question_id").get<std::string>();
  p.prompt = j.at("prompt").get<std::string>();
  p.chosen = j.at("chosen").get<std::string>();
  p.rejected = j.at("rejected").get<std::string>();
  p.tag = pair_tag_from_name(j.at("tag").get<std::string>());
  return p;
}

void write_pairs(const std::vector<PreferencePair>& pairs, const std::string& path) {
  std::vector<nlohmann::json> rows;
  rows.reserve(pairs.size());
  for (const auto& p : pairs) rows.push_back(pair_to_json(p));
  write_jsonl(path, rows);
}

std::vector<FlatPair> read_pairs(const std::string& path) {
  std::vector<FlatPair> out;
  for_each_jsonl_row(path, [&](const nlohmann::json& j, int) { out.push_back(pair_from_json(j)); });
  return out;
}

}  // namespace recut
