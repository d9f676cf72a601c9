#include "recut/answer.hpp"

#include <cctype>
#include <numeric>

namespace recut {

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

std::string_view trim(std::string_view s) {
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

// Multiply/add with overflow detection; parsing bails out instead of wrapping.
bool mul_add(std::int64_t& acc, std::int64_t mul, std::int64_t add) {
  __int128 v = static_cast<__int128>(acc) * mul + add;
  if (v > INT64_MAX || v < INT64_MIN) return false;
  acc = static_cast<std::int64_t>(v);
  return true;
}

// Signed integer or terminating decimal -> exact rational.
std::optional<Rational> parse_number(std::string_view s) {
  s = trim(s);
  if (s.empty()) return std::nullopt;
  std::int64_t sign = 1;
  if (s.front() == '+' || s.front() == '-') {
    if (s.front() == '-') sign = -1;
    s.remove_prefix(1);
  }
  if (s.empty()) return std::nullopt;

  std::int64_t num = 0;
  std::int64_t den = 1;
  bool saw_digit = false;
  bool saw_dot = false;
  for (char c : s) {
    if (c == '.') {
      if (saw_dot) return std::nullopt;
      saw_dot = true;
      continue;
    }
    if (c < '0' || c > '9') return std::nullopt;
    if (!mul_add(num, 10, c - '0')) return std::nullopt;
    if (saw_dot && !mul_add(den, 10, 0)) return std::nullopt;
    saw_digit = true;
  }
  if (!saw_digit) return std::nullopt;
  num *= sign;
  std::int64_t g = std::gcd(num < 0 ? -num : num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational{num, den};
}

}  // namespace

std::optional<Rational> parse_rational(std::string_view s) {
  s = trim(s);
  auto slash = s.find('/');
  if (slash == std::string_view::npos) return parse_number(s);
  if (s.find('/', slash + 1) != std::string_view::npos) return std::nullopt;

  auto top = parse_number(s.substr(0, slash));
  auto bot = parse_number(s.substr(slash + 1));
  if (!top || !bot || bot->num == 0) return std::nullopt;
  // a/b with decimal parts still reduces exactly: (tn/td) / (bn/bd) = tn*bd / td*bn.
  __int128 num = static_cast<__int128>(top->num) * bot->den;
  __int128 den = static_cast<__int128>(top->den) * bot->num;
  if (den < 0) {
    num = -num;
    den = -den;
  }
  if (num > INT64_MAX || num < INT64_MIN || den > INT64_MAX) return std::nullopt;
  std::int64_t n = static_cast<std::int64_t>(num);
  std::int64_t d = static_cast<std::int64_t>(den);
  std::int64_t g = std::gcd(n < 0 ? -n : n, d);
  if (g > 1) {
    n /= g;
    d /= g;
  }
  return Rational{n, d};
}

std::string render_rational(const Rational& r) {
  std::int64_t n = r.num;
  std::int64_t d = r.den;
  if (n == 0) return "0";
  std::string out = std::to_string(n);
  if (d != 1) out += "/" + std::to_string(d);
  return out;
}

std::string normalize_answer(std::string_view raw) {
  std::string_view s = trim(raw);

  // Strip one enclosing \boxed{...} when the closing brace is the final char.
  constexpr std::string_view kBoxed = "\\boxed{";
  if (s.size() >= kBoxed.size() + 1 && s.substr(0, kBoxed.size()) == kBoxed && s.back() == '}') {
    int depth = 0;
    size_t close = std::string_view::npos;
    for (size_t i = kBoxed.size() - 1; i < s.size(); ++i) {
      if (s[i] == '{') ++depth;
      if (s[i] == '}' && --depth == 0) {
        close = i;
        break;
      }
    }
    if (close == s.size() - 1) s = trim(s.substr(kBoxed.size(), close - kBoxed.size()));
  }

  // All trailing periods, not just one, so the function is idempotent
  // ("abc.." must not take two normalizations to settle).
  while (!s.empty() && s.back() == '.') s.remove_suffix(1);
  s = trim(s);

  std::string collapsed;
  collapsed.reserve(s.size());
  bool in_ws = false;
  for (char c : s) {
    if (is_space(c)) {
      in_ws = true;
      continue;
    }
    if (in_ws && !collapsed.empty()) collapsed += ' ';
    in_ws = false;
    collapsed += c;
  }

  if (auto r = parse_rational(collapsed)) return render_rational(*r);

  for (char& c : collapsed) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return collapsed;
}

bool answers_match(std::string_view a, std::string_view b) {
  if (a == b) return true;
  auto ra = parse_rational(a);
  auto rb = parse_rational(b);
  return ra && rb && *ra == *rb;
}

}  // namespace recut
