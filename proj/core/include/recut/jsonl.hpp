#pragma once

#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "recut/types.hpp"

namespace recut {

// Wire format, one JSON object per line:
//   {"question_id": str, "steps": [str], "final_answer": str|null,
//    "provenance": str, "created_at_step": int}
nlohmann::json trajectory_to_json(const Trajectory& t);
Trajectory trajectory_from_json(const nlohmann::json& j);

std::string trajectory_to_jsonl_line(const Trajectory& t);
Trajectory trajectory_from_jsonl_line(const std::string& line);

// Reads a pool file (or combined stream); rows may interleave question ids.
// Each distinct question id becomes one CandidatePool; a provenance=optimal
// row also becomes that pool's optimal trajectory.
std::vector<CandidatePool> read_pools(const std::string& path);
std::vector<CandidatePool> read_pool_dir(const std::string& dir);  // *.pool.jsonl
void write_pool(const CandidatePool& pool, const std::string& path);

// Generic line-by-line JSONL helpers.
void write_jsonl(const std::string& path, const std::vector<nlohmann::json>& rows);
void for_each_jsonl_row(const std::string& path,
                        const std::function<void(const nlohmann::json&, int lineno)>& fn);

}  // namespace recut
