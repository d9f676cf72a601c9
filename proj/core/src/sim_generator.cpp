#include "recut/sim_generator.hpp"

#include <cctype>
#include <optional>

#include "recut/errors.hpp"
#include "recut/rng.hpp"

namespace recut {

namespace {

using OpKind = SyntheticTask::OpKind;

std::optional<std::int64_t> int_after(std::string_view text, std::string_view anchor,
                                      bool skip_tilde = false) {
  size_t pos = text.find(anchor);
  if (pos == std::string_view::npos) return std::nullopt;
  pos += anchor.size();
  while (pos < text.size() && text[pos] == ' ') ++pos;
  if (skip_tilde && pos < text.size() && text[pos] == '~') ++pos;
  size_t begin = pos;
  if (pos < text.size() && text[pos] == '-') ++pos;
  size_t digits = 0;
  while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
    ++pos;
    ++digits;
  }
  if (digits == 0) return std::nullopt;
  std::int64_t v = 0;
  bool neg = text[begin] == '-';
  for (size_t i = begin + (neg ? 1 : 0); i < pos; ++i) v = v * 10 + (text[i] - '0');
  return neg ? -v : v;
}

// Replayed arithmetic state after a committed prefix. `pending` describes a
// trailing computation step the long branch has not verified yet.
struct PendingComp {
  std::int64_t input = 0;
  OpKind kind = OpKind::add;
  std::int64_t operand = 0;
  bool corrupted = false;
};

struct ReplayState {
  size_t ops_done = 0;
  std::int64_t value = 0;
  std::optional<PendingComp> pending;
};

struct PhraseMatch {
  OpKind kind;
  std::int64_t operand;
};

std::optional<PhraseMatch> parse_long_phrase(std::string_view text) {
  struct Entry {
    std::string_view keyword;
    OpKind kind;
  };
  static constexpr Entry entries[] = {
      {"and add ", OpKind::add},           {"and bring in ", OpKind::add},
      {"and take away ", OpKind::subtract}, {"and remove ", OpKind::subtract},
      {"and scale it by ", OpKind::multiply}, {"and multiply it by ", OpKind::multiply},
  };
  for (const auto& e : entries) {
    if (auto x = int_after(text, e.keyword)) return PhraseMatch{e.kind, *x};
  }
  return std::nullopt;
}

ReplayState replay_prefix(const SyntheticTask& task, const std::vector<std::string>& prefix) {
  ReplayState st;
  st.value = task.start;
  for (const auto& step : prefix) {
    if (step.find("Check:") != std::string::npos) {
      if (step.find("Fixed.") != std::string::npos) {
        auto fixed = int_after(step, "that gives ");
        if (!fixed) throw Error("simulated reasoner cannot replay check step: " + step);
        st.value = *fixed;
      }
      st.pending.reset();
      continue;
    }
    if (step.find("we obtain ") != std::string::npos) {
      auto input = int_after(step, "Take ");
      auto phrase = parse_long_phrase(step);
      auto stated = int_after(step, "we obtain ", /*skip_tilde=*/true);
      if (!input || !phrase || !stated)
        throw Error("simulated reasoner cannot replay step: " + step);
      st.ops_done++;
      st.value = *stated;
      st.pending = PendingComp{*input, phrase->kind, phrase->operand,
                               step.find('~') != std::string::npos};
      continue;
    }
    if (step.find(" = ") != std::string::npos) {
      size_t pos = step.find("now ");
      auto input = int_after(step, "now ");
      auto stated = int_after(step, "= ", /*skip_tilde=*/true);
      if (pos == std::string::npos || !input || !stated)
        throw Error("simulated reasoner cannot replay step: " + step);
      // Operator symbol sits after the (possibly signed) input value.
      size_t scan = pos + 4;
      if (scan < step.size() && step[scan] == '-') ++scan;
      size_t sym = step.find_first_of("+-*", scan);
      if (sym == std::string::npos) throw Error("simulated reasoner cannot replay step: " + step);
      OpKind kind = step[sym] == '+' ? OpKind::add
                    : step[sym] == '-' ? OpKind::subtract
                                       : OpKind::multiply;
      auto operand = int_after(step.substr(sym + 1), "");
      if (!operand) throw Error("simulated reasoner cannot replay step: " + step);
      st.ops_done++;
      st.value = *stated;
      st.pending = PendingComp{*input, kind, *operand, step.find('~') != std::string::npos};
      continue;
    }
    // Answer-only or unknown texts carry no arithmetic state.
  }
  return st;
}

const char* op_symbol(OpKind k) {
  switch (k) {
    case OpKind::add: return "+";
    case OpKind::subtract: return "-";
    case OpKind::multiply: return "*";
  }
  return "+";
}

std::string long_phrase(OpKind k, std::int64_t x, Rng& rng) {
  bool alt = rng.uniform(2) == 1;
  std::string xs = std::to_string(x);
  switch (k) {
    case OpKind::add: return (alt ? "bring in " : "add ") + xs;
    case OpKind::subtract: return (alt ? "remove " : "take away ") + xs;
    case OpKind::multiply: return (alt ? "multiply it by " : "scale it by ") + xs;
  }
  return "add " + xs;
}

std::int64_t corrupt_value(std::int64_t true_value, Rng& rng) {
  std::int64_t off = rng.uniform_int(1, 3);
  return true_value + (rng.bernoulli(0.5) ? off : -off);
}

}  // namespace

Continuation SimulatedReasoner::generate(const GenerationRequest& req) {
  auto task = SyntheticTask::parse(req.question.text);
  if (!task)
    throw Error("simulated reasoner cannot parse question text for id " + req.question.id);

  std::string prefix_text;
  for (const auto& s : req.prefix_steps) {
    prefix_text += s;
    prefix_text += '\n';
  }
  std::uint64_t stream = req.seed.value_or(0);
  stream = hash_combine(stream, hash64(req.question.text));
  stream = hash_combine(stream, hash64(variant_kind_name(req.variant.kind)));
  stream = hash_combine(stream, hash64(prefix_text));
  Rng rng(stream);

  ReplayState st = replay_prefix(*task, req.prefix_steps);
  bool verbose = req.variant.kind != VariantKind::short_form;
  int step_no = static_cast<int>(req.prefix_steps.size()) + 1;

  std::string raw;
  auto emit = [&](const std::string& line) {
    if (!raw.empty()) raw += '\n';
    raw += line;
  };
  auto emit_check = [&](const PendingComp& pending) {
    std::int64_t true_r = apply_op(pending.input, {pending.kind, pending.operand});
    if (pending.corrupted && rng.bernoulli(cfg_.rho)) {
      emit("Step " + std::to_string(step_no++) + ": Check: that gives " +
           std::to_string(true_r) + " instead. Fixed.");
      st.value = true_r;
    } else {
      emit("Step " + std::to_string(step_no++) + ": Check: value " + std::to_string(st.value) +
           " holds. OK.");
    }
  };

  // A verbose continuation re-examines the most recent unchecked step, which
  // is the only route by which a bad committed value can be repaired.
  if (verbose && st.pending) emit_check(*st.pending);
  st.pending.reset();

  for (size_t i = st.ops_done; i < task->ops.size(); ++i) {
    const auto& op = task->ops[i];
    std::int64_t input = st.value;
    std::int64_t true_r = apply_op(input, op);
    bool corrupted = rng.bernoulli(cfg_.epsilon);
    std::int64_t stated = corrupted ? corrupt_value(true_r, rng) : true_r;
    std::string mark = corrupted ? "~" : "";
    if (verbose) {
      std::string phrase = long_phrase(op.kind, op.operand, rng);
      emit("Step " + std::to_string(step_no++) + ": Take " + std::to_string(input) + " and " +
           phrase + "; we obtain " + mark + std::to_string(stated) + ".");
      st.value = stated;
      emit_check(PendingComp{input, op.kind, op.operand, corrupted});
    } else {
      emit("Step " + std::to_string(step_no++) + ": now " + std::to_string(input) + " " +
           op_symbol(op.kind) + " " + std::to_string(op.operand) + " = " + mark +
           std::to_string(stated) + ".");
      st.value = stated;
    }
  }

  emit("Answer: \\boxed{" + std::to_string(st.value) + "}");
  return finish_continuation(std::move(raw), 1);
}

Continuation SimulatedReasoner::simulate(const SyntheticTask& task, VariantKind kind,
                                         std::uint64_t seed) const {
  GenerationRequest req;
  req.question.id = "sim-task";
  req.question.text = task.question_text();
  req.question.gold_answer = std::to_string(task.gold());
  req.variant.kind = kind;
  req.seed = seed;
  // Template text irrelevant for the simulator; kind drives the register.
  return const_cast<SimulatedReasoner*>(this)->generate(req);
}

}  // namespace recut
