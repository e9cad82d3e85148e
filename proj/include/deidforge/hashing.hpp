#pragma once

#include <cstdint>
#include <string>
#include <string_view>

// Stable, platform-independent hashing. Every seeded decision in the
// toolkit (surrogate selection, snippet choice, voice choice, date
// offsets) is derived from these primitives so that a run is a pure
// function of (input, seed, config) on any machine.

namespace deidforge {

inline constexpr std::uint64_t kFnvOffset = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t h = kFnvOffset) {
  for (unsigned char c : bytes) {
    h ^= c;
    h *= kFnvPrime;
  }
  return h;
}

// Incremental FNV-1a with 0x1F separators between fields. Integers are
// fed little-endian so the byte stream is unambiguous.
class Hasher {
 public:
  Hasher& field(std::string_view s) {
    h_ = fnv1a64(s, h_);
    return sep();
  }
  Hasher& field(std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h_ ^= static_cast<unsigned char>(v >> (8 * i));
      h_ *= kFnvPrime;
    }
    return sep();
  }
  Hasher& field(std::int64_t v) { return field(static_cast<std::uint64_t>(v)); }
  Hasher& field(int v) { return field(static_cast<std::uint64_t>(static_cast<std::int64_t>(v))); }
  std::uint64_t value() const { return h_; }

 private:
  Hasher& sep() {
    h_ ^= 0x1F;
    h_ *= kFnvPrime;
    return *this;
  }
  std::uint64_t h_ = kFnvOffset;
};

// splitmix64 stream seeded from a hash; used where one decision needs
// several draws (date offsets, digit strings).
class SeedStream {
 public:
  explicit SeedStream(std::uint64_t state) : state_(state) {}

  std::uint64_t next() {
    state_ += 0x9E3779B97F4A7C15ull;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  // n must be > 0. Modulo bias is ~n/2^64, irrelevant for lexicon-sized n.
  std::uint64_t next_below(std::uint64_t n) { return next() % n; }

 private:
  std::uint64_t state_;
};

inline std::string hex64(std::uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[static_cast<std::size_t>(i)] = digits[v & 0xF];
    v >>= 4;
  }
  return out;
}

}  // namespace deidforge
