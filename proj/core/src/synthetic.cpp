#include "recut/synthetic.hpp"

#include <cctype>

#include "recut/errors.hpp"
#include "recut/rng.hpp"

namespace recut {

namespace {

std::optional<std::int64_t> read_int(std::string_view s, size_t& pos) {
  size_t i = pos;
  while (i < s.size() && s[i] == ' ') ++i;
  size_t begin = i;
  if (i < s.size() && (s[i] == '-' || s[i] == '+')) ++i;
  size_t digits = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) {
    ++i;
    ++digits;
  }
  if (digits == 0) return std::nullopt;
  std::int64_t v = 0;
  bool neg = s[begin] == '-';
  for (size_t k = begin + (s[begin] == '-' || s[begin] == '+' ? 1 : 0); k < i; ++k)
    v = v * 10 + (s[k] - '0');
  pos = i;
  return neg ? -v : v;
}

}  // namespace

std::int64_t apply_op(std::int64_t value, const SyntheticTask::Op& op) {
  switch (op.kind) {
    case SyntheticTask::OpKind::add: return value + op.operand;
    case SyntheticTask::OpKind::subtract: return value - op.operand;
    case SyntheticTask::OpKind::multiply: return value * op.operand;
  }
  return value;
}

std::int64_t SyntheticTask::gold() const {
  std::int64_t v = start;
  for (const auto& op : ops) v = apply_op(v, op);
  return v;
}

std::string SyntheticTask::question_text() const {
  std::string out = "Start with " + std::to_string(start) + ".";
  for (const auto& op : ops) {
    switch (op.kind) {
      case OpKind::add: out += " Then add " + std::to_string(op.operand) + "."; break;
      case OpKind::subtract: out += " Then subtract " + std::to_string(op.operand) + "."; break;
      case OpKind::multiply: out += " Then multiply by " + std::to_string(op.operand) + "."; break;
    }
  }
  out += " What is the result?";
  return out;
}

std::optional<SyntheticTask> SyntheticTask::parse(std::string_view text) {
  constexpr std::string_view kStart = "Start with";
  size_t pos = text.find(kStart);
  if (pos == std::string_view::npos) return std::nullopt;
  pos += kStart.size();
  auto start = read_int(text, pos);
  if (!start) return std::nullopt;

  SyntheticTask task;
  task.start = *start;
  constexpr std::string_view kThen = "Then ";
  while ((pos = text.find(kThen, pos)) != std::string_view::npos) {
    pos += kThen.size();
    OpKind kind;
    if (text.substr(pos, 4) == "add ") {
      kind = OpKind::add;
      pos += 4;
    } else if (text.substr(pos, 9) == "subtract ") {
      kind = OpKind::subtract;
      pos += 9;
    } else if (text.substr(pos, 12) == "multiply by ") {
      kind = OpKind::multiply;
      pos += 12;
    } else {
      return std::nullopt;
    }
    auto operand = read_int(text, pos);
    if (!operand) return std::nullopt;
    task.ops.push_back(Op{kind, *operand});
  }
  if (task.ops.empty()) return std::nullopt;
  return task;
}

SyntheticDataset make_synthetic(int count, int k_steps, double epsilon, double rho,
                                std::uint64_t seed, std::string id_prefix) {
  if (count < 1) throw ConfigError("make-synthetic: count must be >= 1");
  if (k_steps < 1) throw ConfigError("make-synthetic: k-steps must be >= 1");
  if (epsilon < 0.0 || epsilon > 1.0) throw ConfigError("make-synthetic: epsilon must be in [0,1]");
  if (rho < 0.0 || rho > 1.0) throw ConfigError("make-synthetic: rho must be in [0,1]");

  SyntheticDataset ds;
  ds.provenance = "synthetic-v1";
  ds.k_steps = k_steps;
  ds.epsilon = epsilon;
  ds.rho = rho;
  ds.seed = seed;
  ds.questions.reserve(static_cast<size_t>(count));

  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, id_prefix + "/q" + std::to_string(i)));
    SyntheticTask task;
    task.start = rng.uniform_int(2, 20);
    for (int s = 0; s < k_steps; ++s) {
      switch (rng.uniform(3)) {
        case 0: task.ops.push_back({SyntheticTask::OpKind::add, rng.uniform_int(2, 29)}); break;
        case 1: task.ops.push_back({SyntheticTask::OpKind::subtract, rng.uniform_int(2, 29)}); break;
        default: task.ops.push_back({SyntheticTask::OpKind::multiply, rng.uniform_int(2, 3)}); break;
      }
    }
    Question q;
    char idbuf[32];
    std::snprintf(idbuf, sizeof(idbuf), "%04d", i);
    q.id = id_prefix + "-" + idbuf;
    q.text = task.question_text();
    q.gold_answer = std::to_string(task.gold());
    ds.questions.push_back(std::move(q));
  }
  return ds;
}

}  // namespace recut
