#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "recut/synthetic.hpp"
#include "recut/tokens.hpp"
#include "recut/types.hpp"

namespace recut {

// Resolved run configuration. On disk this is an INI-style file of
// [section] blocks with key = value lines; CLI overrides win over the file.
struct RunConfig {
  // [paths]
  std::string out_dir = "recut-out";
  std::string train_questions;
  std::string holdout_questions;
  std::string prompts_file;  // empty -> builtin catalog

  // [generator]
  std::string generator = "sim";  // sim | remote
  std::string endpoint;
  std::string model;
  double epsilon = 0.25;
  double rho = 0.5;
  double exploration_temperature = 0.7;
  int max_new_tokens = 1024;
  int concurrency = 4;

  // [explorer]
  int max_steps = 8;
  std::string counter = "whitespace";
  std::string counter_file;

  // [dpo]
  double beta = 0.1;
  double learning_rate = 0.1;
  int epochs = 1;
  int batch_size = 8;
  int vocab_size = 128;
  double smoothing = 3e-4;

  // [merge]
  double alpha = 0.25;
  double density = 0.25;
  std::string merge_mode = "delta";

  // [pipeline]
  std::uint64_t seed = 0;
  int vanilla_samples = 4;
};

RunConfig load_config(const std::string& path);
// "section.key=value" override; unknown keys raise ConfigError.
void apply_override(RunConfig& cfg, const std::string& assignment);
std::string render_config(const RunConfig& cfg);
// Cross-field checks (e.g. remote generator needs an endpoint). Throws
// ConfigError before any work is done.
void validate_config(const RunConfig& cfg);

TokenCounter make_counter(const RunConfig& cfg);

// Question ingestion. JSONL rows {"id","text","gold_answer"} or CSV with
// header id,text,answer. Duplicate or empty fields raise IngestError with
// the offending line number; gold answers are canonicalized on ingest.
std::vector<Question> ingest_questions(const std::string& path, const std::string& format);
void write_questions(const std::vector<Question>& questions, const std::string& path);

// Synthetic dataset persistence: questions as JSONL plus a sidecar
// <path>.meta.json recording provenance and simulator parameters.
void write_synthetic_dataset(const SyntheticDataset& ds, const std::string& path);

}  // namespace recut
