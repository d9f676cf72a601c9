#include "recut/prompts.hpp"

#include <fstream>
#include <sstream>

#include "recut/errors.hpp"

namespace recut {

namespace {

constexpr std::string_view kQuestionPh = "{question}";
constexpr std::string_view kPrefixPh = "{prefix}";

int count_occurrences(std::string_view hay, std::string_view needle) {
  int n = 0;
  size_t pos = 0;
  while ((pos = hay.find(needle, pos)) != std::string_view::npos) {
    ++n;
    pos += needle.size();
  }
  return n;
}

std::string replace_one(std::string text, std::string_view ph, std::string_view value) {
  size_t pos = text.find(ph);
  if (pos != std::string::npos) text.replace(pos, ph.size(), value);
  return text;
}

std::string trim_copy(std::string_view s) {
  while (!s.empty() && (s.front() == '\n' || s.front() == ' ' || s.front() == '\t' || s.front() == '\r'))
    s.remove_prefix(1);
  while (!s.empty() && (s.back() == '\n' || s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return std::string(s);
}

const char* kLongTemplate =
    "You are a careful solver. Reason thoroughly and double-check every step before moving on.\n"
    "Write each step on its own line as 'Step k: ...' and finish with a final line "
    "'Answer: \\boxed{...}'.\n"
    "\n"
    "Problem:\n"
    "{question}\n"
    "\n"
    "Steps so far (continue from here, do not repeat them):\n"
    "{prefix}\n";

const char* kShortTemplate =
    "You are an efficient solver. Use as few steps and as few words as possible.\n"
    "Write each step on its own line as 'Step k: ...' and finish with a final line "
    "'Answer: \\boxed{...}'.\n"
    "\n"
    "Problem:\n"
    "{question}\n"
    "\n"
    "Steps so far (continue from here, do not repeat them):\n"
    "{prefix}\n";

const char* kVanillaTemplate =
    "Solve the problem step by step.\n"
    "Write each step on its own line as 'Step k: ...' and finish with a final line "
    "'Answer: \\boxed{...}'.\n"
    "\n"
    "Problem:\n"
    "{question}\n";

void validate_variant(const InstructionVariant& v) {
  int q = count_occurrences(v.template_text, kQuestionPh);
  int p = count_occurrences(v.template_text, kPrefixPh);
  if (q != 1)
    throw ConfigError(std::string(variant_kind_name(v.kind)) +
                      " template must contain exactly one {question} placeholder");
  if (v.kind == VariantKind::vanilla) {
    if (p > 1) throw ConfigError("vanilla template may contain at most one {prefix} placeholder");
  } else if (p != 1) {
    throw ConfigError(std::string(variant_kind_name(v.kind)) +
                      " template must contain exactly one {prefix} placeholder");
  }
}

}  // namespace

std::string_view variant_kind_name(VariantKind k) {
  switch (k) {
    case VariantKind::long_form: return "long";
    case VariantKind::short_form: return "short";
    case VariantKind::vanilla: return "vanilla";
  }
  return "vanilla";
}

VariantKind variant_kind_from_name(std::string_view s) {
  if (s == "long") return VariantKind::long_form;
  if (s == "short") return VariantKind::short_form;
  if (s == "vanilla") return VariantKind::vanilla;
  throw ConfigError("unknown instruction variant: " + std::string(s));
}

RenderedPrompt render_prompt(const InstructionVariant& variant, const Question& question,
                             const std::vector<std::string>& prefix_steps) {
  std::string prefix_text;
  for (size_t i = 0; i < prefix_steps.size(); ++i) {
    if (i) prefix_text += '\n';
    prefix_text += prefix_steps[i];
  }

  RenderedPrompt out;
  size_t first_ph = variant.template_text.find(kQuestionPh);
  size_t prefix_ph = variant.template_text.find(kPrefixPh);
  if (prefix_ph != std::string::npos && prefix_ph < first_ph) first_ph = prefix_ph;
  if (first_ph == std::string::npos) first_ph = variant.template_text.size();

  // Split at the start of the line holding the first placeholder so the
  // system part carries whole instruction lines only.
  size_t line_start = variant.template_text.rfind('\n', first_ph);
  line_start = (line_start == std::string::npos) ? 0 : line_start + 1;
  out.system = trim_copy(variant.template_text.substr(0, line_start));

  std::string tail = variant.template_text.substr(line_start);
  tail = replace_one(std::move(tail), kQuestionPh, question.text);
  tail = replace_one(std::move(tail), kPrefixPh, prefix_text);
  out.user = trim_copy(tail);

  std::string full = replace_one(variant.template_text, kQuestionPh, question.text);
  full = replace_one(std::move(full), kPrefixPh, prefix_text);
  out.full = trim_copy(full);
  return out;
}

PromptCatalog PromptCatalog::builtin() {
  PromptCatalog c;
  c.long_ = {VariantKind::long_form, kLongTemplate};
  c.short_ = {VariantKind::short_form, kShortTemplate};
  c.vanilla_ = {VariantKind::vanilla, kVanillaTemplate};
  c.validate();
  return c;
}

PromptCatalog PromptCatalog::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open prompt catalog: " + path);
  PromptCatalog c = builtin();
  std::string line;
  std::string section;
  std::string body;
  auto flush = [&]() {
    if (section.empty()) return;
    InstructionVariant v{variant_kind_from_name(section), trim_copy(body) + "\n"};
    switch (v.kind) {
      case VariantKind::long_form: c.long_ = v; break;
      case VariantKind::short_form: c.short_ = v; break;
      case VariantKind::vanilla: c.vanilla_ = v; break;
    }
  };
  while (std::getline(in, line)) {
    if (line.size() >= 2 && line.front() == '[' && line.back() == ']') {
      flush();
      section = line.substr(1, line.size() - 2);
      body.clear();
    } else if (!section.empty()) {
      body += line;
      body += '\n';
    }
  }
  flush();
  c.validate();
  return c;
}

void PromptCatalog::validate() const {
  validate_variant(long_);
  validate_variant(short_);
  validate_variant(vanilla_);
}

const InstructionVariant& PromptCatalog::get(VariantKind k) const {
  switch (k) {
    case VariantKind::long_form: return long_;
    case VariantKind::short_form: return short_;
    case VariantKind::vanilla: return vanilla_;
  }
  return vanilla_;
}

}  // namespace recut
