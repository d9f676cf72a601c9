#include "recut/config.hpp"

#include <cctype>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "recut/answer.hpp"
#include "recut/errors.hpp"
#include "recut/jsonl.hpp"

namespace recut {

namespace {

std::string trim(std::string s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  size_t e = s.find_last_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

struct Field {
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

std::string fmt_double(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

const std::map<std::string, Field>& field_table() {
  static const std::map<std::string, Field> table = [] {
    std::map<std::string, Field> t;
    auto str = [&](const std::string& key, std::string RunConfig::*member) {
      t[key] = {[member](RunConfig& c, const std::string& v) { c.*member = v; },
                [member](const RunConfig& c) { return c.*member; }};
    };
    auto dbl = [&](const std::string& key, double RunConfig::*member) {
      t[key] = {[member, key](RunConfig& c, const std::string& v) {
                  try {
                    c.*member = std::stod(v);
                  } catch (...) {
                    throw ConfigError("bad numeric value for " + key + ": " + v);
                  }
                },
                [member](const RunConfig& c) { return fmt_double(c.*member); }};
    };
    auto integer = [&](const std::string& key, int RunConfig::*member) {
      t[key] = {[member, key](RunConfig& c, const std::string& v) {
                  try {
                    c.*member = std::stoi(v);
                  } catch (...) {
                    throw ConfigError("bad integer value for " + key + ": " + v);
                  }
                },
                [member](const RunConfig& c) { return std::to_string(c.*member); }};
    };
    str("paths.out_dir", &RunConfig::out_dir);
    str("paths.train_questions", &RunConfig::train_questions);
    str("paths.holdout_questions", &RunConfig::holdout_questions);
    str("paths.prompts_file", &RunConfig::prompts_file);
    str("generator.generator", &RunConfig::generator);
    str("generator.endpoint", &RunConfig::endpoint);
    str("generator.model", &RunConfig::model);
    dbl("generator.epsilon", &RunConfig::epsilon);
    dbl("generator.rho", &RunConfig::rho);
    dbl("generator.exploration_temperature", &RunConfig::exploration_temperature);
    integer("generator.max_new_tokens", &RunConfig::max_new_tokens);
    integer("generator.concurrency", &RunConfig::concurrency);
    integer("explorer.max_steps", &RunConfig::max_steps);
    str("explorer.counter", &RunConfig::counter);
    str("explorer.counter_file", &RunConfig::counter_file);
    dbl("dpo.beta", &RunConfig::beta);
    dbl("dpo.learning_rate", &RunConfig::learning_rate);
    integer("dpo.epochs", &RunConfig::epochs);
    integer("dpo.batch_size", &RunConfig::batch_size);
    integer("dpo.vocab_size", &RunConfig::vocab_size);
    dbl("dpo.smoothing", &RunConfig::smoothing);
    dbl("merge.alpha", &RunConfig::alpha);
    dbl("merge.density", &RunConfig::density);
    str("merge.merge_mode", &RunConfig::merge_mode);
    integer("pipeline.vanilla_samples", &RunConfig::vanilla_samples);
    t["pipeline.seed"] = {[](RunConfig& c, const std::string& v) {
                            try {
                              c.seed = std::stoull(v);
                            } catch (...) {
                              throw ConfigError("bad seed value: " + v);
                            }
                          },
                          [](const RunConfig& c) { return std::to_string(c.seed); }};
    return t;
  }();
  return table;
}

}  // namespace

void apply_override(RunConfig& cfg, const std::string& assignment) {
  size_t eq = assignment.find('=');
  if (eq == std::string::npos)
    throw ConfigError("override must look like section.key=value: " + assignment);
  std::string key = trim(assignment.substr(0, eq));
  std::string value = trim(assignment.substr(eq + 1));
  auto it = field_table().find(key);
  if (it == field_table().end()) throw ConfigError("unknown config key: " + key);
  it->second.set(cfg, value);
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  RunConfig cfg;
  std::string line;
  std::string section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#' || line[0] == ';') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("expected key = value at " + path + ":" + std::to_string(lineno));
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (section.empty())
      throw ConfigError("key outside any [section] at " + path + ":" + std::to_string(lineno));
    apply_override(cfg, section + "." + key + "=" + value);
  }
  return cfg;
}

std::string render_config(const RunConfig& cfg) {
  // field_table is sorted by key, so sections render contiguously and the
  // resolved file is byte-stable across runs.
  std::string out;
  std::string current_section;
  for (const auto& [key, field] : field_table()) {
    size_t dot = key.find('.');
    std::string section = key.substr(0, dot);
    if (section != current_section) {
      if (!out.empty()) out += "\n";
      out += "[" + section + "]\n";
      current_section = section;
    }
    out += key.substr(dot + 1) + " = " + field.get(cfg) + "\n";
  }
  return out;
}

void validate_config(const RunConfig& cfg) {
  if (cfg.generator != "sim" && cfg.generator != "remote")
    throw ConfigError("generator must be sim or remote, got " + cfg.generator);
  if (cfg.generator == "remote" && cfg.endpoint.empty())
    throw ConfigError("generator=remote requires generator.endpoint");
  if (cfg.epsilon < 0.0 || cfg.epsilon > 1.0) throw ConfigError("epsilon must be in [0,1]");
  if (cfg.rho < 0.0 || cfg.rho > 1.0) throw ConfigError("rho must be in [0,1]");
  if (cfg.max_steps < 1) throw ConfigError("max_steps must be >= 1");
  if (cfg.beta <= 0.0) throw ConfigError("dpo.beta must be positive");
  if (cfg.epochs < 1) throw ConfigError("dpo.epochs must be >= 1");
  if (cfg.batch_size < 1) throw ConfigError("dpo.batch_size must be >= 1");
  if (cfg.vocab_size < 2 || cfg.vocab_size > 256)
    throw ConfigError("dpo.vocab_size must be in [2,256]");
  if (cfg.smoothing <= 0.0) throw ConfigError("dpo.smoothing must be positive");
  if (cfg.alpha < 0.0 || cfg.alpha > 1.0) throw ConfigError("merge.alpha must be in [0,1]");
  if (cfg.density <= 0.0 || cfg.density > 1.0) throw ConfigError("merge.density must be in (0,1]");
  if (cfg.merge_mode != "delta" && cfg.merge_mode != "literal")
    throw ConfigError("merge.merge_mode must be delta or literal");
  if (cfg.vanilla_samples < 1) throw ConfigError("pipeline.vanilla_samples must be >= 1");
  token_counter_mode_from_name(cfg.counter);
  if (cfg.counter == "external-count-file" && cfg.counter_file.empty())
    throw ConfigError("counter=external-count-file requires explorer.counter_file");
}

TokenCounter make_counter(const RunConfig& cfg) {
  TokenCounterMode mode = token_counter_mode_from_name(cfg.counter);
  if (mode == TokenCounterMode::external_count_file)
    return TokenCounter::from_count_file(cfg.counter_file);
  return TokenCounter(mode);
}

namespace {

// Minimal CSV with quoted fields and doubled quotes; no embedded newlines.
std::vector<std::string> split_csv_row(const std::string& line, int lineno,
                                       const std::string& path) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        field += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field += c;
    }
  }
  if (quoted)
    throw IngestError("unterminated quote at " + path + ":" + std::to_string(lineno));
  out.push_back(std::move(field));
  return out;
}

void add_question(std::vector<Question>& questions, std::unordered_set<std::string>& ids,
                  Question q, int lineno, const std::string& path) {
  if (q.id.empty()) throw IngestError("empty id at " + path + ":" + std::to_string(lineno));
  if (q.text.empty())
    throw IngestError("empty text for id " + q.id + " at " + path + ":" + std::to_string(lineno));
  if (q.gold_answer.empty())
    throw IngestError("empty gold answer for id " + q.id + " at " + path + ":" +
                      std::to_string(lineno));
  if (!ids.insert(q.id).second)
    throw IngestError("duplicate id " + q.id + " at " + path + ":" + std::to_string(lineno));
  q.gold_answer = normalize_answer(q.gold_answer);
  questions.push_back(std::move(q));
}

}  // namespace

std::vector<Question> ingest_questions(const std::string& path, const std::string& format) {
  std::vector<Question> questions;
  std::unordered_set<std::string> ids;

  if (format == "jsonl") {
    try {
      for_each_jsonl_row(path, [&](const nlohmann::json& j, int lineno) {
        Question q;
        q.id = j.value("id", std::string());
        q.text = j.value("text", std::string());
        q.gold_answer = j.value("gold_answer", std::string());
        add_question(questions, ids, std::move(q), lineno, path);
      });
    } catch (const IngestError&) {
      throw;
    } catch (const Error& e) {
      throw IngestError(e.what());
    }
    return questions;
  }

  if (format == "csv") {
    std::ifstream in(path);
    if (!in) throw IngestError("cannot open " + path);
    std::string line;
    int lineno = 0;
    bool header_seen = false;
    while (std::getline(in, line)) {
      ++lineno;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (line.empty()) continue;
      auto fields = split_csv_row(line, lineno, path);
      if (!header_seen) {
        if (fields.size() != 3 || fields[0] != "id" || fields[1] != "text" ||
            fields[2] != "answer")
          throw IngestError("csv header must be id,text,answer at " + path + ":" +
                            std::to_string(lineno));
        header_seen = true;
        continue;
      }
      if (fields.size() != 3)
        throw IngestError("expected 3 csv fields at " + path + ":" + std::to_string(lineno));
      add_question(questions, ids, Question{fields[0], fields[1], fields[2]}, lineno, path);
    }
    if (!header_seen) throw IngestError("csv file has no header: " + path);
    return questions;
  }

  throw ConfigError("unknown question format: " + format + " (expected jsonl or csv)");
}

void write_questions(const std::vector<Question>& questions, const std::string& path) {
  std::vector<nlohmann::json> rows;
  rows.reserve(questions.size());
  for (const auto& q : questions)
    rows.push_back({{"id", q.id}, {"text", q.text}, {"gold_answer", q.gold_answer}});
  write_jsonl(path, rows);
}

void write_synthetic_dataset(const SyntheticDataset& ds, const std::string& path) {
  write_questions(ds.questions, path);
  nlohmann::json meta{{"provenance", ds.provenance}, {"k_steps", ds.k_steps},
                      {"epsilon", ds.epsilon},       {"rho", ds.rho},
                      {"seed", ds.seed},             {"count", ds.questions.size()}};
  std::ofstream out(path + ".meta.json", std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path + ".meta.json");
  out << meta.dump(2) << '\n';
}

}  // namespace recut
