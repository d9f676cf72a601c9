#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <optional>
#include <string>
#include <vector>

#include "recut/dpo.hpp"
#include "recut/preference.hpp"
#include "recut/rng.hpp"
#include "recut/sim_generator.hpp"

using namespace recut;

namespace {

TokenCounter ws() { return TokenCounter(TokenCounterMode::whitespace); }

// Builds a trajectory with an exact whitespace token count and correctness.
// `uniq` renames the first filler word so equal-length texts stay distinct
// under the pool's whitespace-normalized dedup.
Trajectory traj(int tokens, bool correct, int created_at_step, Provenance prov,
                const std::string& qid = "q", int uniq = -1) {
  REQUIRE(tokens >= 5);
  std::string text = "Step 1:";
  for (int i = 0; i < tokens - 4; ++i) {
    if (i == 0 && uniq >= 0)
      text += " u" + std::to_string(uniq);
    else
      text += " w" + std::to_string(i);
  }
  text += correct ? "\nAnswer: \\boxed{5}" : "\nAnswer: \\boxed{6}";
  auto t = make_trajectory(qid, {text}, prov, created_at_step);
  return t;
}

// ---- exhaustive-scan reference (written against the selection rules,
// intentionally structured differently from the library implementation) ----

struct RefView {
  const Trajectory* t;
  bool correct;
  std::int64_t tokens;
};

std::vector<RefView> ref_score(const CandidatePool& pool, const std::string& gold) {
  std::vector<RefView> out;
  TokenCounter counter = ws();
  for (const auto& t : pool.trajectories()) {
    Reward r = score(t, gold, counter);
    out.push_back({&t, r.correct, r.token_count});
  }
  return out;
}

bool ref_prefer(const RefView& a, const RefView& b, bool smallest) {
  if (a.tokens != b.tokens) return smallest ? a.tokens < b.tokens : a.tokens > b.tokens;
  if (a.t->created_at_step != b.t->created_at_step)
    return a.t->created_at_step < b.t->created_at_step;
  return a.t->provenance == Provenance::short_branch &&
         b.t->provenance != Provenance::short_branch;
}

std::optional<Trajectory> ref_positive(const CandidatePool& pool, const std::string& gold) {
  std::optional<RefView> best;
  for (const auto& v : ref_score(pool, gold)) {
    if (!v.correct) continue;
    if (!best || ref_prefer(v, *best, true)) best = v;
  }
  if (!best) return std::nullopt;
  return *best->t;
}

std::optional<Trajectory> ref_neg_acc(const CandidatePool& pool, const std::string& gold) {
  std::optional<RefView> best;
  for (const auto& v : ref_score(pool, gold)) {
    if (v.correct) continue;
    if (!best || ref_prefer(v, *best, false)) best = v;
  }
  if (!best) return std::nullopt;
  return *best->t;
}

std::optional<Trajectory> ref_neg_len(const CandidatePool& pool, const std::string& gold) {
  auto pos = ref_positive(pool, gold);
  if (!pos) return std::nullopt;
  std::int64_t pos_tokens = ws().count(pos->text());
  std::optional<RefView> best;
  for (const auto& v : ref_score(pool, gold)) {
    if (!v.correct || v.tokens <= pos_tokens) continue;
    if (!best || ref_prefer(v, *best, false)) best = v;
  }
  if (!best) return std::nullopt;
  return *best->t;
}

CandidatePool random_pool(Rng& rng, const std::string& qid, int flavor) {
  CandidatePool pool(qid);
  int n = 1 + static_cast<int>(rng.uniform(12));
  Provenance provs[] = {Provenance::long_branch, Provenance::short_branch, Provenance::optimal,
                        Provenance::vanilla};
  int inserted = 0;
  for (int i = 0; i < n; ++i) {
    bool correct;
    switch (flavor) {
      case 0: correct = false; break;                    // no correct trajectory
      case 1: correct = true; break;                     // all correct
      case 2: correct = (inserted == 0); break;          // exactly one correct
      default: correct = rng.bernoulli(0.5); break;      // mixed
    }
    // Narrow token range provokes ties in both directions; the uniquifier
    // keeps token-equal rows distinct so tie rules actually fire.
    int tokens = 5 + static_cast<int>(rng.uniform(8));
    if (pool.insert(traj(tokens, correct, static_cast<int>(rng.uniform(5)), provs[rng.uniform(4)],
                         qid, i)))
      ++inserted;
  }
  return pool;
}

}  // namespace

TEST_CASE("positive selection: shortest correct with deterministic ties") {
  CandidatePool pool("q");
  pool.insert(traj(120, true, 1, Provenance::long_branch));
  pool.insert(traj(80, true, 2, Provenance::long_branch));
  pool.insert(traj(50, false, 1, Provenance::short_branch));
  auto pos = select_positive(pool, "5", ws());
  REQUIRE(pos.has_value());
  CHECK(ws().count(pos->text()) == 80);

  CandidatePool none("q");
  none.insert(traj(10, false, 1, Provenance::long_branch));
  CHECK(!select_positive(none, "5", ws()).has_value());

  // Equal length: earlier created_at_step wins.
  CandidatePool tie("q");
  Trajectory early = traj(30, true, 1, Provenance::long_branch, "q", 1);
  Trajectory late = traj(30, true, 3, Provenance::long_branch, "q", 2);
  tie.insert(late);
  tie.insert(early);
  auto got = select_positive(tie, "5", ws());
  REQUIRE(got.has_value());
  CHECK(got->created_at_step == 1);
}

TEST_CASE("negative selection per the two argmax rules") {
  CandidatePool pool("q");
  pool.insert(traj(80, true, 1, Provenance::short_branch));
  pool.insert(traj(300, true, 2, Provenance::long_branch));
  pool.insert(traj(500, false, 1, Provenance::long_branch));
  auto negs = select_negatives(pool, "5", ws());
  REQUIRE(negs.acc.has_value());
  CHECK(ws().count(negs.acc->text()) == 500);
  REQUIRE(negs.len.has_value());
  CHECK(ws().count(negs.len->text()) == 300);

  // All correct: no accuracy negative.
  CandidatePool all_ok("q");
  all_ok.insert(traj(40, true, 1, Provenance::short_branch));
  all_ok.insert(traj(60, true, 2, Provenance::long_branch));
  auto n2 = select_negatives(all_ok, "5", ws());
  CHECK(!n2.acc.has_value());
  CHECK(n2.len.has_value());

  // Single correct trajectory: the length negative would equal the positive.
  CandidatePool single("q");
  single.insert(traj(40, true, 1, Provenance::short_branch));
  single.insert(traj(90, false, 1, Provenance::long_branch));
  auto n3 = select_negatives(single, "5", ws());
  CHECK(n3.acc.has_value());
  CHECK(!n3.len.has_value());

  // Equal-length correct trajectories yield no length pair either.
  CandidatePool equal_len("q");
  Trajectory a = traj(40, true, 1, Provenance::short_branch, "q", 1);
  Trajectory b = traj(40, true, 2, Provenance::long_branch, "q", 2);
  equal_len.insert(a);
  equal_len.insert(b);
  CHECK(!select_negatives(equal_len, "5", ws()).len.has_value());
}

TEST_CASE("sft-best follows the signed reward ordering") {
  CandidatePool pool("q");
  pool.insert(traj(80, true, 1, Provenance::short_branch));
  pool.insert(traj(300, true, 2, Provenance::long_branch));
  pool.insert(traj(500, false, 1, Provenance::long_branch));
  auto best = select_sft_best(pool, "5", ws());
  REQUIRE(best.has_value());
  CHECK(ws().count(best->text()) == 80);  // 1/80 is the maximum reward

  // All incorrect: the longest is least penalized.
  CandidatePool bad("q");
  bad.insert(traj(50, false, 1, Provenance::short_branch));
  bad.insert(traj(500, false, 2, Provenance::long_branch));
  auto least_bad = select_sft_best(bad, "5", ws());
  REQUIRE(least_bad.has_value());
  CHECK(ws().count(least_bad->text()) == 500);

  CandidatePool empty("q");
  CHECK(!select_sft_best(empty, "5", ws()).has_value());
}

TEST_CASE("builder equals the exhaustive-scan oracle on 1000 random pools") {
  Rng rng(246813579);
  std::vector<CandidatePool> pools;
  std::vector<Question> questions;
  for (int i = 0; i < 1000; ++i) {
    std::string qid = "rq-" + std::to_string(i);
    int flavor = i < 100 ? 0 : i < 200 ? 1 : i < 300 ? 2 : 3;
    pools.push_back(random_pool(rng, qid, flavor));
    questions.push_back(Question{qid, "question text " + qid, "5"});
  }

  auto built = build_datasets(pools, questions, ws());

  int acc_pairs = 0, len_pairs = 0;
  for (size_t i = 0; i < pools.size(); ++i) {
    auto pos = ref_positive(pools[i], "5");
    auto nacc = ref_neg_acc(pools[i], "5");
    auto nlen = ref_neg_len(pools[i], "5");
    if (pos && nacc) ++acc_pairs;
    if (pos && nlen) ++len_pairs;

    auto mine_pos = select_positive(pools[i], "5", ws());
    CHECK(mine_pos.has_value() == pos.has_value());
    if (pos && mine_pos) CHECK(mine_pos->text() == pos->text());
    auto mine_negs = select_negatives(pools[i], "5", ws());
    CHECK(mine_negs.acc.has_value() == nacc.has_value());
    if (nacc && mine_negs.acc) CHECK(mine_negs.acc->text() == nacc->text());
    CHECK(mine_negs.len.has_value() == nlen.has_value());
    if (nlen && mine_negs.len) CHECK(mine_negs.len->text() == nlen->text());
  }
  CHECK(built.acc.pairs.size() == static_cast<size_t>(acc_pairs));
  CHECK(built.len.pairs.size() == static_cast<size_t>(len_pairs));

  // Emitted pairs satisfy their tag invariants; the two datasets share
  // positives wherever both emitted a pair for a question.
  TokenCounter counter = ws();
  for (const auto& p : built.acc.pairs) {
    Reward rc = score(p.chosen, "5", counter);
    Reward rr = score(p.rejected, "5", counter);
    CHECK(rc.correct);
    CHECK(!rr.correct);
    CHECK(p.chosen.text() != p.rejected.text());
  }
  for (const auto& p : built.len.pairs) {
    Reward rc = score(p.chosen, "5", counter);
    Reward rr = score(p.rejected, "5", counter);
    CHECK(rc.correct);
    CHECK(rr.correct);
    CHECK(rr.token_count > rc.token_count);
  }
  for (const auto& pa : built.acc.pairs) {
    for (const auto& pl : built.len.pairs) {
      if (pa.question_id == pl.question_id) CHECK(pa.chosen.text() == pl.chosen.text());
    }
  }
}

TEST_CASE("builder output is invariant to pool ordering") {
  Rng rng(13);
  CandidatePool pool = random_pool(rng, "q", 3);
  std::vector<Question> qs{Question{"q", "text", "5"}};

  std::vector<Trajectory> rows(pool.trajectories());
  std::vector<CandidatePool> forward, backward;
  forward.emplace_back("q");
  backward.emplace_back("q");
  for (const auto& t : rows) forward.back().insert(t);
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) backward.back().insert(*it);

  auto a = build_datasets(forward, qs, ws());
  auto b = build_datasets(backward, qs, ws());
  REQUIRE(a.acc.pairs.size() == b.acc.pairs.size());
  REQUIRE(a.len.pairs.size() == b.len.pairs.size());
  for (size_t i = 0; i < a.acc.pairs.size(); ++i) {
    CHECK(a.acc.pairs[i].chosen.text() == b.acc.pairs[i].chosen.text());
    CHECK(a.acc.pairs[i].rejected.text() == b.acc.pairs[i].rejected.text());
  }
}

TEST_CASE("direct baseline pairs extremes from vanilla samples") {
  SimulatedReasoner sim(SimConfig{0.35, 0.0});
  auto ds = make_synthetic(1, 3, 0.35, 0.0, 2024, "dq");
  auto prompts = PromptCatalog::builtin();
  std::map<std::string, int> skips;

  auto pair = build_direct_dpo(ds.questions[0], sim, prompts, 20, 7, ws(), &skips);
  REQUIRE(pair.has_value());
  CHECK(pair->tag == PairTag::direct);
  Reward rc = score(pair->chosen, ds.questions[0].gold_answer, ws());
  Reward rr = score(pair->rejected, ds.questions[0].gold_answer, ws());
  CHECK(rc.correct);
  CHECK(!rr.correct);

  // Deterministic: the same seed gives the same pair.
  auto again = build_direct_dpo(ds.questions[0], sim, prompts, 20, 7, ws(), nullptr);
  REQUIRE(again.has_value());
  CHECK(again->chosen.text() == pair->chosen.text());
  CHECK(again->rejected.text() == pair->rejected.text());

  // All-correct sampling yields no pair and a recorded skip.
  SimulatedReasoner clean(SimConfig{0.0, 0.0});
  skips.clear();
  auto none = build_direct_dpo(ds.questions[0], clean, prompts, 20, 7, ws(), &skips);
  CHECK(!none.has_value());
  CHECK(skips["all-correct"] == 1);

  CHECK_THROWS_AS(build_direct_dpo(ds.questions[0], sim, prompts, 1, 7, ws(), nullptr),
                  ConfigError);
}

TEST_CASE("preference JSONL round trips, including unicode") {
  Trajectory chosen = make_trajectory("q", {"Step 1: r\xc3\xa9sultat\nAnswer: \\boxed{5}"},
                                      Provenance::short_branch, 1);
  Trajectory rejected = make_trajectory(
      "q", {"Step 1: much longer \xe2\x88\x9a path", "Step 2: end\nAnswer: \\boxed{6}"},
      Provenance::long_branch, 1);
  std::vector<PreferencePair> pairs{
      PreferencePair{"q", "prompt \xc3\xa9", chosen, rejected, PairTag::acc}};

  std::string path = "pairs_roundtrip_test.jsonl";
  CHECK(export_pairs(pairs, path) == 1);
  auto back = read_pairs(path);
  REQUIRE(back.size() == 1);
  CHECK(back[0].question_id == "q");
  CHECK(back[0].prompt == "prompt \xc3\xa9");
  CHECK(back[0].chosen == chosen.text());
  CHECK(back[0].rejected == rejected.text());
  CHECK(back[0].tag == PairTag::acc);

  // Empty dataset: zero rows, still a valid (empty) file.
  CHECK(export_pairs({}, path) == 0);
  CHECK(read_pairs(path).empty());
  std::remove(path.c_str());
}
