#include "recut/evaluator.hpp"

#include <cstdio>
#include <fstream>
#include <unordered_map>

#include "recut/errors.hpp"
#include "recut/reward.hpp"
#include "recut/rng.hpp"

namespace recut {

namespace {

void finalize(EvalReport& r) {
  std::int64_t token_sum = 0;
  int counted = 0;
  for (const auto& row : r.rows) {
    if (row.correct) ++r.correct_count;
    if (row.failed) {
      ++r.failed_count;
      continue;
    }
    token_sum += row.tokens;
    ++counted;
  }
  r.questions = static_cast<int>(r.rows.size());
  r.pass_at_1 = r.questions ? static_cast<double>(r.correct_count) / r.questions : 0.0;
  r.mean_tokens = counted ? static_cast<double>(token_sum) / counted : 0.0;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.4f", v);
  return buf;
}

}  // namespace

EvalReport evaluate_generation(Generator& gen, const PromptCatalog& prompts,
                               const std::vector<Question>& questions,
                               const TokenCounter& counter, std::uint64_t seed,
                               const std::string& dataset, const std::string& model_tag) {
  EvalReport report;
  report.dataset = dataset;
  report.model_tag = model_tag;
  for (const auto& q : questions) {
    EvalRow row;
    row.question_id = q.id;
    try {
      GenerationRequest req;
      req.question = q;
      req.variant = prompts.get(VariantKind::vanilla);
      req.temperature = 0.0;  // greedy: Pass@1 must not depend on sampling luck
      req.seed = derive_seed(seed, q.id + "/eval");
      Continuation c = gen.generate(req);
      Trajectory t = make_trajectory(q.id, c.segmented_steps, Provenance::vanilla, 0);
      Reward r = score(t, q.gold_answer, counter);
      row.correct = r.correct;
      row.tokens = r.token_count;
      row.steps = static_cast<int>(t.steps.size());
    } catch (const Error&) {
      row.failed = true;
    }
    report.rows.push_back(std::move(row));
  }
  finalize(report);
  return report;
}

EvalReport evaluate_rerank(const PolicyModel& policy, const std::vector<CandidatePool>& pools,
                           const std::vector<Question>& questions, const TokenCounter& counter,
                           const std::string& dataset, const std::string& model_tag) {
  std::unordered_map<std::string, const Question*> by_id;
  for (const auto& q : questions) by_id[q.id] = &q;

  EvalReport report;
  report.dataset = dataset;
  report.model_tag = model_tag;
  for (const auto& pool : pools) {
    if (pool.empty()) {
      ++report.skipped_pools;
      continue;
    }
    auto qit = by_id.find(pool.question_id());
    if (qit == by_id.end())
      throw ConfigError("rerank pool references unknown question " + pool.question_id());
    const Question& q = *qit->second;

    const Trajectory* best = nullptr;
    double best_ll = 0.0;
    for (const auto& t : pool.trajectories()) {
      double ll = policy.conditional_log_likelihood(q.text, t.text());
      if (!best || ll > best_ll) {  // strict: ties keep the earliest row
        best = &t;
        best_ll = ll;
      }
    }

    Reward r = score(*best, q.gold_answer, counter);
    EvalRow row;
    row.question_id = q.id;
    row.correct = r.correct;
    row.tokens = r.token_count;
    row.steps = static_cast<int>(best->steps.size());
    report.rows.push_back(std::move(row));
  }
  finalize(report);
  return report;
}

std::string compare_report_text(const std::vector<EvalReport>& reports,
                                const std::string& baseline_tag) {
  if (reports.size() < 2) throw ConfigError("comparison needs at least two reports");
  const EvalReport* base = nullptr;
  for (const auto& r : reports)
    if (r.model_tag == baseline_tag) base = &r;
  if (!base) throw ConfigError("no report tagged '" + baseline_tag + "' to use as baseline");

  std::string out;
  char line[160];
  std::string reduction_col = "reduction_vs_" + baseline_tag;
  std::snprintf(line, sizeof(line), "%-12s %8s %12s %20s\n", "model", "P@1", "mean_tokens",
                reduction_col.c_str());
  out += line;
  for (const auto& r : reports) {
    double reduction = base->mean_tokens > 0.0
                           ? (base->mean_tokens - r.mean_tokens) / base->mean_tokens * 100.0
                           : 0.0;
    std::snprintf(line, sizeof(line), "%-12s %8.4f %12.2f %19.1f%%\n", r.model_tag.c_str(),
                  r.pass_at_1, r.mean_tokens, reduction);
    out += line;
  }
  out += "baseline: " + baseline_tag + "\n";
  return out;
}

std::string compare_report_csv(const std::vector<EvalReport>& reports,
                               const std::string& baseline_tag) {
  if (reports.size() < 2) throw ConfigError("comparison needs at least two reports");
  const EvalReport* base = nullptr;
  for (const auto& r : reports)
    if (r.model_tag == baseline_tag) base = &r;
  if (!base) throw ConfigError("no report tagged '" + baseline_tag + "' to use as baseline");

  std::string out = "model,pass_at_1,mean_tokens,token_reduction_pct_vs_" + baseline_tag + "\n";
  for (const auto& r : reports) {
    double reduction = base->mean_tokens > 0.0
                           ? (base->mean_tokens - r.mean_tokens) / base->mean_tokens * 100.0
                           : 0.0;
    out += r.model_tag + "," + format_double(r.pass_at_1) + "," + format_double(r.mean_tokens) +
           "," + format_double(reduction) + "\n";
  }
  return out;
}

nlohmann::json report_to_json(const EvalReport& r) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& row : r.rows) {
    rows.push_back({{"question_id", row.question_id},
                    {"correct", row.correct},
                    {"tokens", row.tokens},
                    {"steps", row.steps},
                    {"failed", row.failed}});
  }
  return nlohmann::json{{"dataset", r.dataset},
                        {"model_tag", r.model_tag},
                        {"pass_at_1", r.pass_at_1},
                        {"mean_tokens", r.mean_tokens},
                        {"questions", r.questions},
                        {"correct_count", r.correct_count},
                        {"failed_count", r.failed_count},
                        {"skipped_pools", r.skipped_pools},
                        {"rows", std::move(rows)}};
}

EvalReport report_from_json(const nlohmann::json& j) {
  EvalReport r;
  r.dataset = j.at("dataset").get<std::string>();
  r.model_tag = j.at("model_tag").get<std::string>();
  r.pass_at_1 = j.at("pass_at_1").get<double>();
  r.mean_tokens = j.at("mean_tokens").get<double>();
  r.questions = j.at("questions").get<int>();
  r.correct_count = j.at("correct_count").get<int>();
  r.failed_count = j.at("failed_count").get<int>();
  r.skipped_pools = j.at("skipped_pools").get<int>();
  for (const auto& row : j.at("rows")) {
    EvalRow e;
    e.question_id = row.at("question_id").get<std::string>();
    e.correct = row.at("correct").get<bool>();
    e.tokens = row.at("tokens").get<std::int64_t>();
    e.steps = row.at("steps").get<int>();
    e.failed = row.at("failed").get<bool>();
    r.rows.push_back(std::move(e));
  }
  return r;
}

void write_report(const EvalReport& r, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write report to " + path);
  out << report_to_json(r).dump(2) << '\n';
}

EvalReport read_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read report from " + path);
  nlohmann::json j;
  in >> j;
  return report_from_json(j);
}

std::string report_rows_csv(const EvalReport& r) {
  std::string out = "question_id,correct,tokens,steps\n";
  for (const auto& row : r.rows) {
    out += row.question_id + "," + (row.correct ? "1" : "0") + "," + std::to_string(row.tokens) +
           "," + std::to_string(row.steps) + "\n";
  }
  return out;
}

}  // namespace recut
