#include "recut/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <thread>
#include <unordered_map>

#include "recut/dpo.hpp"
#include "recut/errors.hpp"
#include "recut/hash.hpp"
#include "recut/jsonl.hpp"
#include "recut/merge.hpp"
#include "recut/preference.hpp"
#include "recut/remote_generator.hpp"
#include "recut/reward.hpp"
#include "recut/rng.hpp"
#include "recut/sim_generator.hpp"

namespace fs = std::filesystem;

namespace recut {

std::unique_ptr<Generator> make_generator(const RunConfig& cfg) {
  validate_config(cfg);
  if (cfg.generator == "sim") return std::make_unique<SimulatedReasoner>(SimConfig{cfg.epsilon, cfg.rho});
  RemoteConfig rc;
  rc.base_url = cfg.endpoint;
  rc.model = cfg.model;
  rc.max_in_flight = cfg.concurrency;
  return std::make_unique<RemoteGenerator>(rc);
}

PromptCatalog load_catalog(const RunConfig& cfg) {
  if (cfg.prompts_file.empty()) return PromptCatalog::builtin();
  return PromptCatalog::from_file(cfg.prompts_file);
}

std::string sanitize_id(const std::string& id) {
  std::string out;
  out.reserve(id.size());
  for (char c : id) {
    bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
              c == '-' || c == '_' || c == '.';
    out += ok ? c : '_';
  }
  return out;
}

void atomic_write_file(const std::string& path, const std::string& bytes) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
    if (!out) throw Error("write failed for " + tmp);
  }
  fs::rename(tmp, path);
}

namespace {

struct QuestionOutcome {
  ExplorationResult result;
  bool reused = false;
};

nlohmann::json status_json(const std::string& qid, const ExplorationResult& r) {
  return nlohmann::json{{"question_id", qid},
                        {"aborted", r.aborted},
                        {"reason", r.abort_reason},
                        {"steps", r.traces.size()}};
}

std::vector<StepTrace> load_traces(const std::string& path) {
  std::vector<StepTrace> traces;
  try {
    for_each_jsonl_row(path, [&](const nlohmann::json& j, int) {
      traces.push_back(step_trace_from_json(j));
    });
  } catch (const std::exception& e) {
    throw ResumeError("cannot replay trace file " + path + ": " + e.what());
  }
  return traces;
}

std::string pool_text(const CandidatePool& pool) {
  std::string bytes;
  for (const auto& t : pool.trajectories()) {
    bytes += trajectory_to_jsonl_line(t);
    bytes += '\n';
  }
  return bytes;
}

}  // namespace

ExploreStageResult run_explore_stage(const std::vector<Question>& questions, Generator& gen,
                                     const PromptCatalog& prompts, const ExplorerConfig& cfg,
                                     int concurrency, const std::string& out_dir, bool resume) {
  fs::create_directories(out_dir);
  std::vector<QuestionOutcome> outcomes(questions.size());

  std::atomic<size_t> next{0};
  auto worker = [&] {
    for (;;) {
      size_t i = next.fetch_add(1);
      if (i >= questions.size()) return;
      const Question& q = questions[i];
      std::string stem = out_dir + "/" + sanitize_id(q.id);
      QuestionOutcome& outcome = outcomes[i];

      if (resume && fs::exists(stem + ".status.json")) {
        std::ifstream sf(stem + ".status.json");
        nlohmann::json status = nlohmann::json::parse(sf, nullptr, false);
        if (!status.is_discarded() && !status.value("aborted", true) &&
            fs::exists(stem + ".pool.jsonl")) {
          auto pools = read_pools(stem + ".pool.jsonl");
          if (pools.size() == 1) {
            outcome.result.pool = std::move(pools.front());
            outcome.result.optimal = outcome.result.pool.optimal();
            if (fs::exists(stem + ".trace.jsonl"))
              outcome.result.traces = load_traces(stem + ".trace.jsonl");
            outcome.reused = true;
            continue;
          }
        }
      }

      std::vector<StepTrace> prior;
      if (resume && fs::exists(stem + ".trace.jsonl")) prior = load_traces(stem + ".trace.jsonl");
      outcome.result = prior.empty() ? explore(q, gen, prompts, cfg)
                                     : recut::resume(q, gen, prompts, cfg, prior);

      atomic_write_file(stem + ".pool.jsonl", pool_text(outcome.result.pool));
      std::string trace_bytes;
      for (const auto& tr : outcome.result.traces) {
        trace_bytes += step_trace_to_json(tr, q.id).dump();
        trace_bytes += '\n';
      }
      atomic_write_file(stem + ".trace.jsonl", trace_bytes);
      atomic_write_file(stem + ".status.json", status_json(q.id, outcome.result).dump(2) + "\n");
    }
  };

  int workers = std::max(1, concurrency);
  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (int w = 0; w < workers; ++w) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  // Combined trace stream, deterministic question order.
  std::string all_traces;
  for (size_t i = 0; i < questions.size(); ++i) {
    for (const auto& tr : outcomes[i].result.traces) {
      all_traces += step_trace_to_json(tr, questions[i].id).dump();
      all_traces += '\n';
    }
  }
  atomic_write_file(out_dir + "/trace.jsonl", all_traces);

  ExploreStageResult out;
  for (auto& o : outcomes) {
    if (o.result.aborted) {
      ++out.aborted;
      continue;
    }
    ++out.completed;
    if (o.reused) ++out.reused;
    out.pools.push_back(std::move(o.result.pool));
  }
  return out;
}

namespace {

void hash_tree(const std::string& root, const std::string& rel, nlohmann::json& artifacts) {
  std::vector<std::string> names;
  for (const auto& entry : fs::directory_iterator(root + "/" + rel)) {
    names.push_back(entry.path().filename().string());
  }
  std::sort(names.begin(), names.end());
  for (const auto& name : names) {
    std::string rel_path = rel.empty() ? name : rel + "/" + name;
    std::string abs_path = root + "/" + rel_path;
    if (fs::is_directory(abs_path)) {
      hash_tree(root, rel_path, artifacts);
    } else if (name != "manifest.json") {
      artifacts[rel_path] = sha256_file(abs_path);
    }
  }
}

struct VanillaStats {
  double correct_mean_tokens = 0.0;
  int correct_count = 0;
  int total = 0;
};

}  // namespace

PipelineResult pipeline_run(const RunConfig& cfg) {
  validate_config(cfg);
  if (cfg.train_questions.empty() || cfg.holdout_questions.empty())
    throw ConfigError("pipeline requires paths.train_questions and paths.holdout_questions");

  const std::string out = cfg.out_dir;
  fs::create_directories(out);
  fs::create_directories(out + "/questions");
  fs::create_directories(out + "/explore");
  fs::create_directories(out + "/vanilla");
  fs::create_directories(out + "/prefs");
  fs::create_directories(out + "/models");
  fs::create_directories(out + "/eval");

  atomic_write_file(out + "/resolved.ini", render_config(cfg));

  auto train_questions = ingest_questions(cfg.train_questions, "jsonl");
  auto holdout_questions = ingest_questions(cfg.holdout_questions, "jsonl");
  write_questions(train_questions, out + "/questions/train.jsonl");
  write_questions(holdout_questions, out + "/questions/holdout.jsonl");

  auto gen = make_generator(cfg);
  PromptCatalog prompts = load_catalog(cfg);
  TokenCounter counter = make_counter(cfg);

  ExplorerConfig ecfg;
  ecfg.max_steps = cfg.max_steps;
  ecfg.counter = counter;
  ecfg.exploration_temperature = cfg.exploration_temperature;
  ecfg.max_new_tokens = cfg.max_new_tokens;

  std::cerr << "[pipeline] explore train (" << train_questions.size() << " questions)\n";
  ecfg.seed = derive_seed(cfg.seed, "explore/train");
  auto train_stage = run_explore_stage(train_questions, *gen, prompts, ecfg, cfg.concurrency,
                                       out + "/explore/train", /*resume=*/true);
  std::cerr << "[pipeline] explore holdout (" << holdout_questions.size() << " questions)\n";
  ecfg.seed = derive_seed(cfg.seed, "explore/holdout");
  auto holdout_stage = run_explore_stage(holdout_questions, *gen, prompts, ecfg, cfg.concurrency,
                                         out + "/explore/holdout", /*resume=*/true);
  if (train_stage.pools.empty() || holdout_stage.pools.empty())
    throw Error("exploration produced no usable pools");

  // Vanilla samples double as the base-model fit corpus and as the verbose
  // yardstick the selected positives are compared against.
  std::cerr << "[pipeline] vanilla sampling (" << cfg.vanilla_samples << " per question)\n";
  std::vector<std::string> fit_docs;
  VanillaStats vstats;
  {
    std::string rows;
    std::int64_t correct_tokens = 0;
    for (const auto& q : train_questions) {
      for (int j = 0; j < cfg.vanilla_samples; ++j) {
        GenerationRequest req;
        req.question = q;
        req.variant = prompts.get(VariantKind::vanilla);
        req.temperature = cfg.exploration_temperature;
        req.max_new_tokens = cfg.max_new_tokens;
        req.seed = derive_seed(cfg.seed, q.id + "/vanilla/" + std::to_string(j));
        Continuation c = gen->generate(req);
        Trajectory t = make_trajectory(q.id, c.segmented_steps, Provenance::vanilla, 0);
        Reward r = score(t, q.gold_answer, counter);
        ++vstats.total;
        if (r.correct) {
          ++vstats.correct_count;
          correct_tokens += r.token_count;
        }
        fit_docs.push_back(q.text + "\n" + t.text());
        rows += trajectory_to_jsonl_line(t);
        rows += '\n';
      }
    }
    if (vstats.correct_count > 0)
      vstats.correct_mean_tokens =
          static_cast<double>(correct_tokens) / vstats.correct_count;
    atomic_write_file(out + "/vanilla/train_vanilla.jsonl", rows);
  }

  std::cerr << "[pipeline] build preference datasets\n";
  BuiltDatasets prefs = build_datasets(train_stage.pools, train_questions, counter);
  export_pairs(prefs.acc.pairs, out + "/prefs/d_acc.jsonl");
  export_pairs(prefs.len.pairs, out + "/prefs/d_len.jsonl");

  double positives_mean_tokens = 0.0;
  int positives_count = 0;
  {
    std::unordered_map<std::string, const Question*> by_id;
    for (const auto& q : train_questions) by_id[q.id] = &q;
    std::int64_t sum = 0;
    for (const auto& pool : train_stage.pools) {
      auto positive = select_positive(pool, by_id.at(pool.question_id())->gold_answer, counter);
      if (!positive) continue;
      sum += counter.count(positive->text());
      ++positives_count;
    }
    if (positives_count > 0) positives_mean_tokens = static_cast<double>(sum) / positives_count;
  }

  nlohmann::json stats{
      {"acc_pairs", prefs.acc.pairs.size()},
      {"len_pairs", prefs.len.pairs.size()},
      {"acc_skips", prefs.acc.skip_counts},
      {"len_skips", prefs.len.skip_counts},
      {"positives_count", positives_count},
      {"positives_mean_tokens", positives_mean_tokens},
      {"vanilla_samples", vstats.total},
      {"vanilla_correct_count", vstats.correct_count},
      {"vanilla_correct_mean_tokens", vstats.correct_mean_tokens},
      {"train_aborted", train_stage.aborted},
      {"holdout_aborted", holdout_stage.aborted},
  };
  atomic_write_file(out + "/prefs/stats.json", stats.dump(2) + "\n");

  std::cerr << "[pipeline] fit base policy (" << fit_docs.size() << " docs)\n";
  PolicyModel base = PolicyModel::fit(fit_docs, cfg.vocab_size, cfg.smoothing);
  write_container(base.to_tensor_map(), out + "/models/base.ckpt");

  auto to_flat = [](const std::vector<PreferencePair>& pairs) {
    std::vector<FlatPair> flat;
    flat.reserve(pairs.size());
    for (const auto& p : pairs)
      flat.push_back(FlatPair{p.question_id, p.prompt, p.chosen.text(), p.rejected.text(), p.tag});
    return flat;
  };

  std::cerr << "[pipeline] train specialists (acc: " << prefs.acc.pairs.size()
            << " pairs, len: " << prefs.len.pairs.size() << " pairs)\n";
  DpoConfig dcfg{cfg.beta, cfg.learning_rate, cfg.epochs, cfg.batch_size, 0};
  dcfg.seed = derive_seed(cfg.seed, "dpo/acc");
  PolicyModel m_acc = train_dpo(base, to_flat(prefs.acc.pairs), dcfg).model;
  dcfg.seed = derive_seed(cfg.seed, "dpo/len");
  PolicyModel m_len = train_dpo(base, to_flat(prefs.len.pairs), dcfg).model;
  write_container(m_acc.to_tensor_map(), out + "/models/m_acc.ckpt");
  write_container(m_len.to_tensor_map(), out + "/models/m_len.ckpt");

  std::cerr << "[pipeline] merge\n";
  MergeConfig mcfg;
  mcfg.alpha = cfg.alpha;
  mcfg.density = cfg.density;
  mcfg.mode = cfg.merge_mode == "literal" ? MergeMode::literal : MergeMode::delta;
  if (mcfg.mode == MergeMode::delta) mcfg.base = base.to_tensor_map();
  TensorMap merged = merge(m_acc.to_tensor_map(), m_len.to_tensor_map(), mcfg);
  write_container(merged, out + "/models/m_merge.ckpt");
  PolicyModel m_merge = PolicyModel::from_tensor_map(merged);

  std::cerr << "[pipeline] rerank evaluation (4 arms, " << holdout_stage.pools.size()
            << " held-out pools)\n";
  PipelineResult result;
  result.out_dir = out;
  result.prefs_stats = stats;
  // The fitted-but-untrained policy is the control arm of every comparison.
  result.report_base = evaluate_rerank(base, holdout_stage.pools, holdout_questions, counter,
                                       "holdout", "base");
  result.report_acc =
      evaluate_rerank(m_acc, holdout_stage.pools, holdout_questions, counter, "holdout", "m_acc");
  result.report_len =
      evaluate_rerank(m_len, holdout_stage.pools, holdout_questions, counter, "holdout", "m_len");
  result.report_merge = evaluate_rerank(m_merge, holdout_stage.pools, holdout_questions, counter,
                                        "holdout", "m_merge");

  write_report(result.report_base, out + "/eval/report_base.json");
  write_report(result.report_acc, out + "/eval/report_acc.json");
  write_report(result.report_len, out + "/eval/report_len.json");
  write_report(result.report_merge, out + "/eval/report_merge.json");
  std::vector<EvalReport> reports{result.report_base, result.report_acc, result.report_len,
                                  result.report_merge};
  atomic_write_file(out + "/eval/compare.txt", compare_report_text(reports, "base"));
  atomic_write_file(out + "/eval/compare.csv", compare_report_csv(reports, "base"));
  for (const auto& r : reports)
    atomic_write_file(out + "/eval/rows_" + r.model_tag + ".csv", report_rows_csv(r));

  nlohmann::json manifest;
  manifest["seed"] = cfg.seed;
  manifest["config_sha256"] = sha256_hex(render_config(cfg));
  manifest["inputs"] = {{"train_questions", sha256_file(cfg.train_questions)},
                        {"holdout_questions", sha256_file(cfg.holdout_questions)}};
  nlohmann::json artifacts = nlohmann::json::object();
  hash_tree(out, "", artifacts);
  manifest["artifacts"] = std::move(artifacts);
  atomic_write_file(out + "/manifest.json", manifest.dump(2) + "\n");
  result.manifest = std::move(manifest);
  std::cerr << "[pipeline] done: " << out << "\n";
  return result;
}

}  // namespace recut
