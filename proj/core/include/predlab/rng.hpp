#pragma once

#include <cstdint>
#include <limits>
#include <string_view>

namespace predlab {

/// FNV-1a, used to turn stream names into keys.
constexpr std::uint64_t hash_name(std::string_view name) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : name) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the i-th output is a keyed hash of i, so a stream
/// is fully determined by (seed, stream name) and never by call interleaving
/// with other streams.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  CounterRng(std::uint64_t seed, std::string_view stream)
      : key_(mix64(seed ^ mix64(hash_name(stream)))) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  result_type operator()() { return at(counter_++); }

  /// Random access into the stream.
  result_type at(std::uint64_t i) const { return mix64(key_ + 0x9e3779b97f4a7c15ULL * (i + 1)); }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  /// Uniform integer in [0, n). Requires n > 0.
  std::uint64_t below(std::uint64_t n) {
    // Lemire's multiply-shift with rejection
    const std::uint64_t threshold = (0 - n) % n;
    for (;;) {
      const std::uint64_t x = (*this)();
      const u128 m = static_cast<u128>(x) * n;
      if (static_cast<std::uint64_t>(m) >= threshold) {
        return static_cast<std::uint64_t>(m >> 64);
      }
    }
  }

  std::uint64_t position() const { return counter_; }

 private:
  __extension__ using u128 = unsigned __int128;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace predlab
