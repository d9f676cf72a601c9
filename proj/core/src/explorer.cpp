#include "recut/explorer.hpp"

#include <future>

#include "recut/errors.hpp"
#include "recut/jsonl.hpp"
#include "recut/rng.hpp"

namespace recut {

namespace {

GenerationRequest build_request(const Question& q, const std::vector<std::string>& prefix,
                                const InstructionVariant& variant, const ExplorerConfig& cfg,
                                int step, std::string_view branch) {
  GenerationRequest req;
  req.question = q;
  req.prefix_steps = prefix;
  req.variant = variant;
  req.temperature = cfg.exploration_temperature;
  req.max_new_tokens = cfg.max_new_tokens;
  // Seeds are derived per (question, step, branch) so interrupted runs can
  // be resumed without replaying earlier draws.
  req.seed = derive_seed(cfg.seed, q.id + "/t" + std::to_string(step) + "/" + std::string(branch));
  return req;
}

ExplorationResult run_loop(const Question& question, Generator& gen, const PromptCatalog& prompts,
                           const ExplorerConfig& cfg, std::vector<StepTrace> traces) {
  if (question.gold_answer.empty())
    throw ConfigError("exploration requires a gold answer for question " + question.id);
  if (cfg.max_steps < 1) throw ConfigError("explorer max_steps must be >= 1");

  ExplorationResult out;
  out.pool = CandidatePool(question.id);

  // Rebuild committed prefix and pool contents from any prior traces.
  std::vector<std::string> prefix;
  bool done = false;
  for (const auto& tr : traces) {
    out.pool.insert(tr.long_candidate);
    out.pool.insert(tr.short_candidate);
    prefix.push_back(tr.chosen_step_text);
    if (contains_answer_marker(tr.chosen_step_text)) done = true;
  }
  int t = static_cast<int>(traces.size()) + 1;
  out.traces = std::move(traces);

  while (!done && t <= cfg.max_steps) {
    GenerationRequest long_req =
        build_request(question, prefix, prompts.get(VariantKind::long_form), cfg, t, "long");
    GenerationRequest short_req =
        build_request(question, prefix, prompts.get(VariantKind::short_form), cfg, t, "short");

    Continuation long_cont, short_cont;
    try {
      if (cfg.concurrent_branches) {
        auto long_future =
            std::async(std::launch::async, [&] { return gen.generate(long_req); });
        short_cont = gen.generate(short_req);
        long_cont = long_future.get();
      } else {
        long_cont = gen.generate(long_req);
        short_cont = gen.generate(short_req);
      }
    } catch (const Error& e) {
      out.aborted = true;
      out.abort_reason = e.what();
      return out;
    }

    auto full_steps = [&](const Continuation& c) {
      std::vector<std::string> steps = prefix;
      steps.insert(steps.end(), c.segmented_steps.begin(), c.segmented_steps.end());
      return steps;
    };
    Trajectory long_cand = make_trajectory(question.id, full_steps(long_cont),
                                           Provenance::long_branch, t);
    Trajectory short_cand = make_trajectory(question.id, full_steps(short_cont),
                                            Provenance::short_branch, t);
    out.pool.insert(long_cand);
    out.pool.insert(short_cand);

    StepTrace trace;
    trace.step = t;
    trace.long_reward = score(long_cand, question.gold_answer, cfg.counter);
    trace.short_reward = score(short_cand, question.gold_answer, cfg.counter);
    trace.long_candidate = std::move(long_cand);
    trace.short_candidate = std::move(short_cand);
    // Strictly-greater comparison makes exact ties fall to the short branch.
    trace.chosen = trace.long_reward.value > trace.short_reward.value ? VariantKind::long_form
                                                                      : VariantKind::short_form;
    const Continuation& chosen_cont =
        trace.chosen == VariantKind::long_form ? long_cont : short_cont;
    trace.chosen_step_text = chosen_cont.segmented_steps.front();

    prefix.push_back(trace.chosen_step_text);
    done = contains_answer_marker(trace.chosen_step_text);
    out.traces.push_back(std::move(trace));
    ++t;
  }

  Trajectory optimal = make_trajectory(question.id, prefix, Provenance::optimal,
                                       static_cast<int>(out.traces.size()));
  out.pool.set_optimal(optimal);
  out.optimal = std::move(optimal);
  return out;
}

}  // namespace

ExplorationResult explore(const Question& question, Generator& gen, const PromptCatalog& prompts,
                          const ExplorerConfig& cfg) {
  return run_loop(question, gen, prompts, cfg, {});
}

ExplorationResult resume(const Question& question, Generator& gen, const PromptCatalog& prompts,
                         const ExplorerConfig& cfg, const std::vector<StepTrace>& prior_traces) {
  return run_loop(question, gen, prompts, cfg, prior_traces);
}

nlohmann::json step_trace_to_json(const StepTrace& t, const std::string& question_id) {
  nlohmann::json j;
  j["question_id"] = question_id;
  j["step"] = t.step;
  j["long"] = trajectory_to_json(t.long_candidate);
  j["short"] = trajectory_to_json(t.short_candidate);
  j["long_reward"] = {{"value", t.long_reward.value},
                      {"correct", t.long_reward.correct},
                      {"tokens", t.long_reward.token_count}};
  j["short_reward"] = {{"value", t.short_reward.value},
                       {"correct", t.short_reward.correct},
                       {"tokens", t.short_reward.token_count}};
  j["chosen"] = std::string(variant_kind_name(t.chosen));
  j["chosen_step_text"] = t.chosen_step_text;
  return j;
}

StepTrace step_trace_from_json(const nlohmann::json& j) {
  StepTrace t;
  t.step = j.at("step").get<int>();
  t.long_candidate = trajectory_from_json(j.at("long"));
  t.short_candidate = trajectory_from_json(j.at("short"));
  t.long_reward.value = j.at("long_reward").at("value").get<double>();
  t.long_reward.correct = j.at("long_reward").at("correct").get<bool>();
  t.long_reward.token_count = j.at("long_reward").at("tokens").get<std::int64_t>();
  t.short_reward.value = j.at("short_reward").at("value").get<double>();
  t.short_reward.correct = j.at("short_reward").at("correct").get<bool>();
  t.short_reward.token_count = j.at("short_reward").at("tokens").get<std::int64_t>();
  t.chosen = variant_kind_from_name(j.at("chosen").get<std::string>());
  t.chosen_step_text = j.at("chosen_step_text").get<std::string>();
  return t;
}

}  // namespace recut
