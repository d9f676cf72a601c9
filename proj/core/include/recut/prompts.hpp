#pragma once

#include <string>
#include <string_view>

#include "recut/types.hpp"

namespace recut {

enum class VariantKind { long_form, short_form, vanilla };

std::string_view variant_kind_name(VariantKind k);
VariantKind variant_kind_from_name(std::string_view s);

// A prompt template with {question} and {prefix} placeholders. The vanilla
// template may omit {prefix}; the other two must carry exactly one of each.
struct InstructionVariant {
  VariantKind kind = VariantKind::vanilla;
  std::string template_text;
};

// System/user split for chat-style endpoints: the preamble above the first
// placeholder becomes the system message, the rest (rendered) the user one.
struct RenderedPrompt {
  std::string system;
  std::string user;
  std::string full;  // whole template rendered, for single-string generators
};

RenderedPrompt render_prompt(const InstructionVariant& variant, const Question& question,
                             const std::vector<std::string>& prefix_steps);

// The three instruction templates, built in or loaded from a plain-text
// catalog file of "[long] / [short] / [vanilla]" sections.
class PromptCatalog {
 public:
  static PromptCatalog builtin();
  static PromptCatalog from_file(const std::string& path);

  const InstructionVariant& get(VariantKind k) const;

 private:
  InstructionVariant long_;
  InstructionVariant short_;
  InstructionVariant vanilla_;
  void validate() const;
};

}  // namespace recut
