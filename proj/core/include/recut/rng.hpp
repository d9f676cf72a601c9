#pragma once

#include <cstdint>
#include <string_view>

namespace recut {

// SplitMix64. Standard-library distributions are not bit-stable across
// implementations, so every sampling decision in the project goes through
// this generator and the helpers below.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, n). Rejection-free modulo is fine here: n is always tiny
  // compared to 2^64, so the bias is unobservable and the code stays branch-free.
  std::uint64_t uniform(std::uint64_t n) { return n ? next_u64() % n : 0; }

  // Uniform in [0, 1) with 53 significant bits.
  double uniform_real() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  bool bernoulli(double p) { return uniform_real() < p; }

  // Uniform integer in [lo, hi] inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return lo + static_cast<std::int64_t>(uniform(static_cast<std::uint64_t>(hi - lo + 1)));
  }

 private:
  std::uint64_t state_;
};

// FNV-1a, used to derive independent seed streams from (run seed, labels).
// Derivation by hashing rather than by sequential draws is what makes
// aborted explorations resumable: the stream for (question, step, branch)
// does not depend on how much randomness earlier questions consumed.
inline std::uint64_t hash64(std::string_view s, std::uint64_t h = 0xcbf29ce484222325ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  Rng r(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
  return r.next_u64();
}

inline std::uint64_t derive_seed(std::uint64_t root, std::string_view label) {
  return hash_combine(root, hash64(label));
}

}  // namespace recut
