#include "recut/generator.hpp"

#include <cctype>

#include "recut/errors.hpp"
#include "recut/reward.hpp"

namespace recut {

namespace {

std::string_view trim_view(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// `Step <k>:` at line start, case-insensitive, optional surrounding blanks.
bool is_step_marker_line(std::string_view line) {
  size_t i = 0;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  static constexpr std::string_view kw = "step";
  for (char c : kw) {
    if (i >= line.size() || std::tolower(static_cast<unsigned char>(line[i])) != c) return false;
    ++i;
  }
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  size_t digits = 0;
  while (i < line.size() && std::isdigit(static_cast<unsigned char>(line[i]))) {
    ++i;
    ++digits;
  }
  if (digits == 0) return false;
  while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
  return i < line.size() && line[i] == ':';
}

bool is_answer_line(std::string_view line) {
  std::string_view t = trim_view(line);
  return t.substr(0, 7) == "Answer:" || t.substr(0, 7) == "\\boxed{";
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  while (start <= text.size()) {
    size_t end = text.find('\n', start);
    if (end == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, end - start));
    start = end + 1;
  }
  return lines;
}

std::string join_lines(const std::vector<std::string_view>& lines, size_t from, size_t to) {
  std::string out;
  for (size_t i = from; i < to; ++i) {
    if (i > from) out += '\n';
    out += lines[i];
  }
  return out;
}

}  // namespace

SegmentedText segment_steps(std::string_view raw_text) {
  SegmentedText out;
  if (trim_view(raw_text).empty()) return out;

  auto lines = split_lines(raw_text);
  std::vector<size_t> markers;
  for (size_t i = 0; i < lines.size(); ++i)
    if (is_step_marker_line(lines[i])) markers.push_back(i);

  if (!markers.empty()) {
    // Leading lines with content form their own segment; blank-only leading
    // lines stay attached to the first marker segment so no byte is lost.
    size_t first = markers.front();
    bool leading_content = false;
    for (size_t i = 0; i < first; ++i)
      if (!trim_view(lines[i]).empty()) leading_content = true;
    if (first > 0 && leading_content) out.steps.push_back(join_lines(lines, 0, first));
    for (size_t m = 0; m < markers.size(); ++m) {
      size_t begin = (m == 0 && !leading_content) ? 0 : markers[m];
      size_t end = (m + 1 < markers.size()) ? markers[m + 1] : lines.size();
      out.steps.push_back(join_lines(lines, begin, end));
    }
  } else {
    // Paragraph fallback: blank-line boundaries.
    std::vector<std::pair<size_t, size_t>> paras;
    size_t i = 0;
    while (i < lines.size()) {
      while (i < lines.size() && trim_view(lines[i]).empty()) ++i;
      if (i >= lines.size()) break;
      size_t begin = i;
      while (i < lines.size() && !trim_view(lines[i]).empty()) ++i;
      paras.emplace_back(begin, i);
    }
    for (auto [begin, end] : paras) out.steps.push_back(join_lines(lines, begin, end));
    // An answer-only closing paragraph belongs to the step it concludes.
    if (out.steps.size() >= 2) {
      auto [b, e] = paras.back();
      bool answer_only = true;
      for (size_t k = b; k < e; ++k)
        if (!is_answer_line(lines[k])) answer_only = false;
      if (answer_only) {
        std::string last = std::move(out.steps.back());
        out.steps.pop_back();
        out.steps.back() += '\n';
        out.steps.back() += last;
      }
    }
  }

  if (!out.steps.empty()) out.terminated = contains_answer_marker(out.steps.back());
  return out;
}

Continuation finish_continuation(std::string raw_text, int attempts) {
  SegmentedText seg = segment_steps(raw_text);
  if (seg.steps.empty()) throw EmptyGeneration("generator returned empty text");
  Continuation c;
  c.raw_text = std::move(raw_text);
  c.segmented_steps = std::move(seg.steps);
  c.terminated = seg.terminated;
  c.attempts = attempts;
  return c;
}

}  // namespace recut
