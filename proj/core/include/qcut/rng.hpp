#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>

#include "qcut/error.hpp"

namespace qcut {

// Deterministic random stream. Every consumer of randomness forks its own
// named stream from a master seed, so results do not depend on the order in
// which independent pieces of work happen to run.
//
// All draws go through explicit 53-bit conversions rather than the standard
// <random> distributions, so that a given (seed, call sequence) produces the
// same values on every standard library implementation.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform double in [0, 1).
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform double in [lo, hi).
  double next_in(double lo, double hi) {
    return lo + (hi - lo) * next_unit();
  }

  // Uniform integer in [0, n).
  std::size_t next_index(std::size_t n) {
    if (n == 0) fail(ErrorKind::InvalidArgument, "next_index: empty range");
    // Rejection sampling keeps the draw exactly uniform.
    const std::uint64_t bound = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    std::uint64_t v = next_u64();
    while (v >= limit) v = next_u64();
    return static_cast<std::size_t>(v % bound);
  }

  // Weighted pick by inverse CDF over non-negative weights (need not sum to 1).
  std::size_t next_weighted(std::span<const double> weights) {
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0 || !std::isfinite(w))
        fail(ErrorKind::InvalidArgument, "next_weighted: bad weight");
      total += w;
    }
    if (total <= 0.0)
      fail(ErrorKind::DegenerateScores, "next_weighted: all weights zero");
    const double target = next_unit() * total;
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < weights.size(); ++i) {
      cum += weights[i];
      if (target < cum) return i;
    }
    return weights.empty() ? 0 : weights.size() - 1;
  }

  // Fisher-Yates shuffle.
  template <typename T>
  void shuffle(std::span<T> items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      const std::size_t j = next_index(i);
      std::swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t fnv1a64(std::uint64_t h, std::string_view s) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t fnv1a64(std::uint64_t h, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) {
    h ^= (v >> (8 * i)) & 0xffU;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline void key_accumulate(std::uint64_t& h, std::string_view part) {
  h = fnv1a64(h, part);
  h = fnv1a64(h, std::uint64_t{0x1f});  // separator
}

inline void key_accumulate(std::uint64_t& h, const std::string& part) {
  key_accumulate(h, std::string_view(part));
}

inline void key_accumulate(std::uint64_t& h, const char* part) {
  key_accumulate(h, std::string_view(part));
}

template <typename T>
  requires std::is_integral_v<T>
inline void key_accumulate(std::uint64_t& h, T part) {
  h = fnv1a64(h, static_cast<std::uint64_t>(part));
  h = fnv1a64(h, std::uint64_t{0x1e});
}

}  // namespace detail

// Derive the seed of a named sub-stream. Labels are hashed, not concatenated,
// so "ab"+"c" and "a"+"bc" yield different streams.
template <typename... Parts>
std::uint64_t fork_seed(std::uint64_t master, const Parts&... parts) {
  std::uint64_t h = 0xcbf29ce484222325ULL ^ detail::splitmix64(master);
  (detail::key_accumulate(h, parts), ...);
  return detail::splitmix64(h);
}

template <typename... Parts>
RngStream fork_stream(std::uint64_t master, const Parts&... parts) {
  return RngStream(fork_seed(master, parts...));
}

}  // namespace qcut
