#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "recut/generator.hpp"
#include "recut/policy.hpp"
#include "recut/tokens.hpp"
#include "recut/types.hpp"

namespace recut {

struct EvalRow {
  std::string question_id;
  bool correct = false;
  std::int64_t tokens = 0;
  int steps = 0;
  bool failed = false;  // generator failure; counted incorrect, excluded from mean
};

struct EvalReport {
  std::string dataset;
  std::string model_tag;
  double pass_at_1 = 0.0;   // correct / questions, exactly
  double mean_tokens = 0.0; // arithmetic mean over non-failed rows
  int questions = 0;
  int correct_count = 0;
  int failed_count = 0;
  int skipped_pools = 0;    // rerank mode: empty pools
  std::vector<EvalRow> rows;
};

// One greedy (temperature 0) vanilla generation per question.
EvalReport evaluate_generation(Generator& gen, const PromptCatalog& prompts,
                               const std::vector<Question>& questions,
                               const TokenCounter& counter, std::uint64_t seed,
                               const std::string& dataset, const std::string& model_tag);

// Selects the argmax conditional-log-likelihood member of each pool under
// the policy (ties keep the earliest pool row) and grades the selection.
EvalReport evaluate_rerank(const PolicyModel& policy, const std::vector<CandidatePool>& pools,
                           const std::vector<Question>& questions, const TokenCounter& counter,
                           const std::string& dataset, const std::string& model_tag);

// Side-by-side P@1 / mean tokens with percentage token reduction against a
// named baseline report. Requires at least two reports.
std::string compare_report_text(const std::vector<EvalReport>& reports,
                                const std::string& baseline_tag);
std::string compare_report_csv(const std::vector<EvalReport>& reports,
                               const std::string& baseline_tag);

nlohmann::json report_to_json(const EvalReport& r);
EvalReport report_from_json(const nlohmann::json& j);
void write_report(const EvalReport& r, const std::string& path);
EvalReport read_report(const std::string& path);

// Per-question CSV with columns question_id, correct, tokens, steps.
std::string report_rows_csv(const EvalReport& r);

}  // namespace recut
