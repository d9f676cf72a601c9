#include <doctest.h>

#include <map>
#include <string>

#include "recut/answer.hpp"
#include "recut/explorer.hpp"
#include "recut/errors.hpp"
#include "recut/rng.hpp"
#include "recut/sim_generator.hpp"

using namespace recut;

namespace {

TokenCounter ws() { return TokenCounter(TokenCounterMode::whitespace); }

// Scripted generator: replies keyed by (variant, step). Step = prefix size + 1.
class ScriptedGenerator : public Generator {
 public:
  std::map<std::pair<std::string, int>, std::string> script;
  int fail_at_step = -1;  // every branch throws at this step

  Continuation generate(const GenerationRequest& req) override {
    int step = static_cast<int>(req.prefix_steps.size()) + 1;
    if (step == fail_at_step) throw GenerationError("scripted failure");
    auto it = script.find({std::string(variant_kind_name(req.variant.kind)), step});
    if (it == script.end()) throw GenerationError("no scripted reply");
    return finish_continuation(it->second, 1);
  }
  std::string name() const override { return "scripted"; }
};

// Wraps a generator and fails exactly once at a chosen (branch, step).
class FlakyOnce : public Generator {
 public:
  Generator& inner;
  std::string fail_variant;
  int fail_step;
  bool armed = true;

  FlakyOnce(Generator& g, std::string variant, int step)
      : inner(g), fail_variant(std::move(variant)), fail_step(step) {}

  Continuation generate(const GenerationRequest& req) override {
    int step = static_cast<int>(req.prefix_steps.size()) + 1;
    if (armed && step == fail_step &&
        variant_kind_name(req.variant.kind) == fail_variant) {
      armed = false;
      throw GenerationError("transient failure");
    }
    return inner.generate(req);
  }
  std::string name() const override { return "flaky"; }
};

Question synthetic_question(int k, std::uint64_t seed) {
  auto ds = make_synthetic(1, k, 0.0, 0.0, seed, "xq");
  return ds.questions[0];
}

bool is_prefix(const std::vector<std::string>& prefix, const Trajectory& t) {
  if (t.steps.size() < prefix.size()) return false;
  for (size_t i = 0; i < prefix.size(); ++i)
    if (t.steps[i].text != prefix[i]) return false;
  return true;
}

}  // namespace

TEST_CASE("exploration commits the higher-reward branch's first step") {
  ScriptedGenerator gen;
  // Step 1: both candidates correct, short is fewer tokens -> short wins.
  gen.script[{"long", 1}] =
      "Step 1: a very long and wordy derivation indeed\nStep 2: more words\nAnswer: \\boxed{5}";
  gen.script[{"short", 1}] = "Step 1: quick\nStep 2: also quick\nAnswer: \\boxed{5}";
  // Step 2 (prefix = ["Step 1: quick"]): terminating continuations.
  gen.script[{"long", 2}] = "Step 2: long finish words words\nAnswer: \\boxed{5}";
  gen.script[{"short", 2}] = "Step 2: done\nAnswer: \\boxed{5}";

  Question q{"s1", "irrelevant", "5"};
  ExplorerConfig cfg;
  cfg.max_steps = 8;
  cfg.counter = ws();
  cfg.concurrent_branches = false;
  auto result = explore(q, gen, PromptCatalog::builtin(), cfg);

  REQUIRE(!result.aborted);
  REQUIRE(result.traces.size() == 2);
  CHECK(result.traces[0].chosen == VariantKind::short_form);
  CHECK(result.traces[0].chosen_step_text == "Step 1: quick");
  // Step 2's short continuation terminates, so exploration stops there.
  REQUIRE(result.optimal.has_value());
  CHECK(result.optimal->steps.size() == 2);
  CHECK(result.optimal->final_answer == "5");
  CHECK(result.pool.size() <= 2 * 2 + 1);
}

TEST_CASE("exact reward ties fall to the short branch") {
  ScriptedGenerator gen;
  // Identical token counts, both incorrect: tie -> short.
  gen.script[{"long", 1}] = "Step 1: aa bb\nAnswer: \\boxed{9}";
  gen.script[{"short", 1}] = "Step 1: cc dd\nAnswer: \\boxed{8}";
  Question q{"s2", "irrelevant", "5"};
  ExplorerConfig cfg;
  cfg.max_steps = 3;
  cfg.counter = ws();
  cfg.concurrent_branches = false;
  auto result = explore(q, gen, PromptCatalog::builtin(), cfg);
  REQUIRE(result.traces.size() == 1);
  CHECK(result.traces[0].long_reward.value == result.traces[0].short_reward.value);
  CHECK(result.traces[0].chosen == VariantKind::short_form);
}

TEST_CASE("generator failure aborts and keeps the partial pool") {
  ScriptedGenerator gen;
  gen.script[{"long", 1}] = "Step 1: l1 l2 l3\nStep 2: l4\nAnswer: \\boxed{9}";
  gen.script[{"short", 1}] = "Step 1: s\nStep 2: t\nAnswer: \\boxed{9}";
  gen.fail_at_step = 2;
  Question q{"s3", "irrelevant", "5"};
  ExplorerConfig cfg;
  cfg.max_steps = 4;
  cfg.counter = ws();
  cfg.concurrent_branches = false;
  auto result = explore(q, gen, PromptCatalog::builtin(), cfg);
  CHECK(result.aborted);
  CHECK(!result.optimal.has_value());
  CHECK(result.pool.size() == 2);
  CHECK(result.traces.size() == 1);
}

TEST_CASE("explorer contract holds on seeded simulator questions") {
  SimulatedReasoner sim(SimConfig{0.25, 0.5});
  ExplorerConfig cfg;
  cfg.max_steps = 8;
  cfg.counter = ws();
  auto prompts = PromptCatalog::builtin();

  for (int i = 0; i < 25; ++i) {
    Question q = synthetic_question(3, 1000 + i);
    cfg.seed = derive_seed(77, q.id);
    auto result = explore(q, sim, prompts, cfg);
    REQUIRE(!result.aborted);

    // Pool bound: two candidates per executed step plus the optimal.
    CHECK(result.pool.size() <= 2 * result.traces.size() + 1);

    // Greedy consistency and the prefix property at every step.
    std::vector<std::string> prefix;
    for (const auto& tr : result.traces) {
      double chosen = tr.chosen == VariantKind::long_form ? tr.long_reward.value
                                                          : tr.short_reward.value;
      double other = tr.chosen == VariantKind::long_form ? tr.short_reward.value
                                                         : tr.long_reward.value;
      CHECK(chosen >= other);
      CHECK(is_prefix(prefix, tr.long_candidate));
      CHECK(is_prefix(prefix, tr.short_candidate));
      CHECK(tr.long_candidate.provenance == Provenance::long_branch);
      CHECK(tr.short_candidate.provenance == Provenance::short_branch);
      CHECK(tr.long_candidate.created_at_step == tr.step);
      prefix.push_back(tr.chosen_step_text);
    }
    // Exactly one step appended per iteration.
    REQUIRE(result.optimal.has_value());
    CHECK(result.optimal->steps.size() == result.traces.size());
    CHECK(result.optimal->provenance == Provenance::optimal);
  }
}

TEST_CASE("golden: one-op task terminates at step 1") {
  // The winning short continuation is a single merged step, so the optimal
  // trajectory dedupes against it and the pool holds two entries.
  SimulatedReasoner sim(SimConfig{0.0, 0.0});
  Question q = synthetic_question(1, 4242);
  ExplorerConfig cfg;
  cfg.max_steps = 8;
  cfg.counter = ws();
  cfg.seed = 9;
  auto result = explore(q, sim, PromptCatalog::builtin(), cfg);
  REQUIRE(!result.aborted);
  CHECK(result.traces.size() == 1);
  REQUIRE(result.optimal.has_value());
  CHECK(result.optimal->steps.size() == 1);
  CHECK(result.optimal->final_answer.has_value());
  CHECK(answers_match(normalize_answer(*result.optimal->final_answer), q.gold_answer));
  CHECK(result.pool.size() == 2);
}

TEST_CASE("resume after an abort matches the uninterrupted run") {
  SimulatedReasoner sim(SimConfig{0.3, 0.6});
  ExplorerConfig cfg;
  cfg.max_steps = 8;
  cfg.counter = ws();
  cfg.seed = 31337;
  auto prompts = PromptCatalog::builtin();
  Question q = synthetic_question(4, 555);

  auto uninterrupted = explore(q, sim, prompts, cfg);
  REQUIRE(!uninterrupted.aborted);
  REQUIRE(uninterrupted.traces.size() >= 3);

  FlakyOnce flaky(sim, "long", 3);
  auto partial = explore(q, flaky, prompts, cfg);
  CHECK(partial.aborted);
  CHECK(partial.traces.size() == 2);

  auto resumed = resume(q, flaky, prompts, cfg, partial.traces);
  REQUIRE(!resumed.aborted);
  REQUIRE(resumed.traces.size() == uninterrupted.traces.size());
  for (size_t i = 0; i < resumed.traces.size(); ++i) {
    CHECK(resumed.traces[i].chosen_step_text == uninterrupted.traces[i].chosen_step_text);
    CHECK(resumed.traces[i].long_candidate.text() ==
          uninterrupted.traces[i].long_candidate.text());
    CHECK(resumed.traces[i].short_candidate.text() ==
          uninterrupted.traces[i].short_candidate.text());
  }
  CHECK(resumed.optimal->text() == uninterrupted.optimal->text());
  REQUIRE(resumed.pool.size() == uninterrupted.pool.size());
  for (size_t i = 0; i < resumed.pool.size(); ++i)
    CHECK(resumed.pool.trajectories()[i].text() == uninterrupted.pool.trajectories()[i].text());
}

TEST_CASE("resume with no prior traces is a fresh start") {
  SimulatedReasoner sim(SimConfig{0.0, 0.0});
  ExplorerConfig cfg;
  cfg.max_steps = 4;
  cfg.counter = ws();
  cfg.seed = 1;
  Question q = synthetic_question(2, 888);
  auto fresh = explore(q, sim, PromptCatalog::builtin(), cfg);
  auto via_resume = resume(q, sim, PromptCatalog::builtin(), cfg, {});
  CHECK(fresh.optimal->text() == via_resume.optimal->text());
}

TEST_CASE("resume on a completed exploration is a no-op") {
  SimulatedReasoner sim(SimConfig{0.0, 0.0});
  ExplorerConfig cfg;
  cfg.max_steps = 6;
  cfg.counter = ws();
  cfg.seed = 2;
  Question q = synthetic_question(2, 999);
  auto done = explore(q, sim, PromptCatalog::builtin(), cfg);
  auto again = resume(q, sim, PromptCatalog::builtin(), cfg, done.traces);
  CHECK(again.traces.size() == done.traces.size());
  CHECK(again.optimal->text() == done.optimal->text());
  CHECK(again.pool.size() == done.pool.size());
}

TEST_CASE("step traces round-trip through JSON") {
  SimulatedReasoner sim(SimConfig{0.2, 0.5});
  ExplorerConfig cfg;
  cfg.max_steps = 5;
  cfg.counter = ws();
  cfg.seed = 3;
  Question q = synthetic_question(3, 777);
  auto result = explore(q, sim, PromptCatalog::builtin(), cfg);
  for (const auto& tr : result.traces) {
    StepTrace back = step_trace_from_json(step_trace_to_json(tr, q.id));
    CHECK(back.step == tr.step);
    CHECK(back.chosen == tr.chosen);
    CHECK(back.chosen_step_text == tr.chosen_step_text);
    CHECK(back.long_candidate.text() == tr.long_candidate.text());
    CHECK(back.short_reward.value == doctest::Approx(tr.short_reward.value).epsilon(1e-12));
  }
}

TEST_CASE("exploration requires a gold answer") {
  SimulatedReasoner sim(SimConfig{0.0, 0.0});
  ExplorerConfig cfg;
  cfg.counter = ws();
  Question q{"nogold", "Start with 1. Then add 2. What is the result?", ""};
  CHECK_THROWS_AS(explore(q, sim, PromptCatalog::builtin(), cfg), ConfigError);
}
