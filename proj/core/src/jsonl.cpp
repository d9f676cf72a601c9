#include "recut/jsonl.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>

#include "recut/errors.hpp"

namespace recut {

nlohmann::json trajectory_to_json(const Trajectory& t) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& s : t.steps) steps.push_back(s.text);
  nlohmann::json j;
  j["question_id"] = t.question_id;
  j["steps"] = std::move(steps);
  if (t.final_answer)
    j["final_answer"] = *t.final_answer;
  else
    j["final_answer"] = nullptr;
  j["provenance"] = std::string(provenance_name(t.provenance));
  j["created_at_step"] = t.created_at_step;
  return j;
}

Trajectory trajectory_from_json(const nlohmann::json& j) {
  Trajectory t;
  t.question_id = j.at("question_id").get<std::string>();
  const auto& steps = j.at("steps");
  if (!steps.is_array() || steps.empty()) throw Error("trajectory row has no steps");
  int idx = 0;
  for (const auto& s : steps) t.steps.push_back(ReasoningStep{idx++, s.get<std::string>()});
  if (j.contains("final_answer") && !j.at("final_answer").is_null())
    t.final_answer = j.at("final_answer").get<std::string>();
  auto prov = provenance_from_name(j.at("provenance").get<std::string>());
  if (!prov) throw Error("unknown provenance: " + j.at("provenance").get<std::string>());
  t.provenance = *prov;
  t.created_at_step = j.at("created_at_step").get<int>();
  return t;
}

std::string trajectory_to_jsonl_line(const Trajectory& t) { return trajectory_to_json(t).dump(); }

Trajectory trajectory_from_jsonl_line(const std::string& line) {
  nlohmann::json j = nlohmann::json::parse(line);
  return trajectory_from_json(j);
}

void for_each_jsonl_row(const std::string& path,
                        const std::function<void(const nlohmann::json&, int)>& fn) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded()) throw Error("bad JSON at " + path + ":" + std::to_string(lineno));
    fn(j, lineno);
  }
}

void write_jsonl(const std::string& path, const std::vector<nlohmann::json>& rows) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  for (const auto& r : rows) out << r.dump() << '\n';
  if (!out) throw Error("write failed for " + path);
}

std::vector<CandidatePool> read_pools(const std::string& path) {
  // std::map keeps pool order deterministic (sorted by question id) for
  // combined streams; single-question files are unaffected.
  std::map<std::string, CandidatePool> by_question;
  std::map<std::string, Trajectory> optimals;
  for_each_jsonl_row(path, [&](const nlohmann::json& j, int) {
    Trajectory t = trajectory_from_json(j);
    std::string qid = t.question_id;
    auto [it, inserted] = by_question.try_emplace(qid, CandidatePool(qid));
    if (t.provenance == Provenance::optimal) optimals[qid] = t;
    it->second.insert(std::move(t));
  });
  std::vector<CandidatePool> pools;
  pools.reserve(by_question.size());
  for (auto& [qid, pool] : by_question) {
    auto opt = optimals.find(qid);
    if (opt != optimals.end()) pool.set_optimal(opt->second);
    pools.push_back(std::move(pool));
  }
  return pools;
}

std::vector<CandidatePool> read_pool_dir(const std::string& dir) {
  std::vector<std::string> files;
  for (const auto& entry : std::filesystem::directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    std::string name = entry.path().filename().string();
    if (name.size() > 11 && name.substr(name.size() - 11) == ".pool.jsonl")
      files.push_back(entry.path().string());
  }
  std::sort(files.begin(), files.end());
  std::vector<CandidatePool> pools;
  for (const auto& f : files) {
    auto batch = read_pools(f);
    for (auto& p : batch) pools.push_back(std::move(p));
  }
  return pools;
}

void write_pool(const CandidatePool& pool, const std::string& path) {
  std::vector<nlohmann::json> rows;
  rows.reserve(pool.size());
  for (const auto& t : pool.trajectories()) rows.push_back(trajectory_to_json(t));
  write_jsonl(path, rows);
}

}  // namespace recut
