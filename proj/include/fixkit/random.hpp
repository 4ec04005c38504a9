#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>

#include "fixkit/value.hpp"

namespace fixkit {

// Deterministic random source.  All draws go through next_below, which uses
// the widening-multiply reduction so the stream does not depend on the
// standard library's distribution implementations.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  // Uniform draw in [0, bound); bound 0 yields 0.
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound == 0) return 0;
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next()) * bound) >> 64);
  }

  // Uniform in [lo, hi] inclusive.
  long long next_in(long long lo, long long hi) {
    return lo + static_cast<long long>(
                    next_below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  bool chance(std::uint64_t num, std::uint64_t den) {
    return next_below(den) < num;
  }

 private:
  std::mt19937_64 engine_;
};

// Stable per-check seed derivation, so any report can be reproduced from its
// recorded seed alone.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view law,
                                 std::string_view subject) {
  std::uint64_t h = 1469598103934665603ull;  // FNV-1a
  auto mix = [&h](std::string_view s) {
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ull;
    }
  };
  mix(law);
  mix("/");
  mix(subject);
  return h ^ base;
}

namespace detail {

inline const char* symbol_alphabet(size_t i) {
  static const char* names[] = {"nil", "t",   "a",    "b",  "foo",
                                "x",   ":k",  ":num", ":q", "zig-zag"};
  return names[i % 10];
}

inline Value random_atom(Rng& rng) {
  switch (rng.next_below(6)) {
    case 0: {
      // Mostly small integers, occasionally very large ones.
      if (rng.chance(1, 16)) {
        Value::Int big = 1;
        big <<= 70;
        big += static_cast<long long>(rng.next_below(1000));
        return Value::integer(rng.chance(1, 2) ? big : -big);
      }
      return Value::integer(rng.next_in(-20, 20));
    }
    case 1:
      return Value::character(static_cast<unsigned char>(rng.next_below(256)));
    case 2: {
      static const char cs[] =
          "abcdefghijklmnopqrstuvwxyz0123456789 -";
      std::string s;
      size_t n = rng.next_below(6);
      for (size_t i = 0; i < n; ++i)
        s += cs[rng.next_below(sizeof(cs) - 1)];
      return Value::string(std::move(s));
    }
    case 3:
      return Value::symbol(symbol_alphabet(rng.next_below(10)));
    case 4:
      return Value::nil();
    default:
      return Value::t();
  }
}

}  // namespace detail

// Arbitrary value from the full universe; the pair count is bounded by the
// size budget, so budget 0 always yields an atom.
inline Value generate_raw(std::uint64_t budget, Rng& rng) {
  if (budget == 0 || rng.chance(2, 5)) return detail::random_atom(rng);
  std::uint64_t left = rng.next_below(budget);
  return Value::cons(generate_raw(left, rng),
                     generate_raw(budget - 1 - left, rng));
}

inline Value generate_raw(std::uint64_t budget, std::uint64_t seed) {
  Rng rng(seed);
  return generate_raw(budget, rng);
}

}  // namespace fixkit
