#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace recut {

// Exact rational with the sign carried on the numerator. den > 0 always.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  friend bool operator==(const Rational& a, const Rational& b) {
    return static_cast<__int128>(a.num) * b.den == static_cast<__int128>(b.num) * a.den;
  }
};

// Parses an integer, terminating decimal, or "a/b" (optional spaces around
// the slash) into an exact reduced rational. Returns nullopt on anything
// else, including values that would overflow 64-bit intermediates.
std::optional<Rational> parse_rational(std::string_view s);

// Reduced canonical rendering: "n" when the denominator is 1, else "n/d".
std::string render_rational(const Rational& r);

// Canonical answer form: trim, strip one enclosing \boxed{...}, strip
// trailing periods, collapse internal whitespace; rationals render as exact
// reduced fractions, everything else is lowercased. Total and idempotent.
std::string normalize_answer(std::string_view raw);

// True iff byte-equal, or both parse as rationals and are exactly equal.
bool answers_match(std::string_view a, std::string_view b);

}  // namespace recut
