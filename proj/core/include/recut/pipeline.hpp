#pragma once

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "recut/config.hpp"
#include "recut/evaluator.hpp"
#include "recut/explorer.hpp"
#include "recut/generator.hpp"

namespace recut {

// Builds the configured generator (seeded simulator or remote client).
std::unique_ptr<Generator> make_generator(const RunConfig& cfg);
PromptCatalog load_catalog(const RunConfig& cfg);

struct ExploreStageResult {
  std::vector<CandidatePool> pools;  // completed explorations, question order
  int completed = 0;
  int aborted = 0;
  int reused = 0;  // prior completed results picked up from disk
};

// Explores every question with a worker pool, writing one
// <id>.pool.jsonl + <id>.status.json per question plus a combined
// trace.jsonl. Existing completed questions in out_dir are reused when
// `resume` is set; aborted ones continue from their persisted traces.
ExploreStageResult run_explore_stage(const std::vector<Question>& questions, Generator& gen,
                                     const PromptCatalog& prompts, const ExplorerConfig& cfg,
                                     int concurrency, const std::string& out_dir,
                                     bool resume = false);

struct PipelineResult {
  std::string out_dir;
  nlohmann::json manifest;
  EvalReport report_base;
  EvalReport report_acc;
  EvalReport report_len;
  EvalReport report_merge;
  nlohmann::json prefs_stats;
};

// Full run: explore train and holdout questions, build preference data,
// fit the base scorer on vanilla samples, train the two specialists, merge,
// and rerank-evaluate all four arms on the held-out pools. Every artifact
// lands under cfg.out_dir and is listed by content hash in manifest.json.
PipelineResult pipeline_run(const RunConfig& cfg);

// Filesystem-safe file stem for a question id.
std::string sanitize_id(const std::string& id);

// Writes bytes to path atomically (temp file + rename).
void atomic_write_file(const std::string& path, const std::string& bytes);

}  // namespace recut
