#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "synthlab/errors.hpp"

namespace synthlab::rng {

// splitmix64 step (Steele/Lea/Flood mixing constants). Used only to derive
// decorrelated child seeds from a base seed, never as the sampling engine.
inline std::uint64_t splitmix64_next(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Child seed for stream `index` of `base`. Pure, so sample i of a run can be
// regenerated in isolation and batches can be rendered in any order.
inline std::uint64_t derive_seed(std::uint64_t base, std::uint64_t index) {
  std::uint64_t s = base;
  std::uint64_t mixed = splitmix64_next(s);
  s = mixed ^ index;
  return splitmix64_next(s);
}

// FNV-1a over a tag string, to carve named sub-streams ("epoch", "val", ...).
inline constexpr std::uint64_t tag_hash(std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : tag) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag,
                                 std::uint64_t index) {
  return derive_seed(derive_seed(base, tag_hash(tag)), index);
}

// Deterministic generator with portable draw primitives. std::mt19937_64 is
// bit-specified by the standard; std::uniform_*_distribution is not, so all
// draws go through the hand-rolled mappings below.
class Engine {
public:
  explicit Engine(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t raw() { return gen_(); }

  // Uniform on [0, 1): top 53 bits scaled by 2^-53.
  double uniform() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer on [0, n) via 128-bit multiply with rejection.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ArgumentError("below: n must be positive");
    unsigned __int128 m = static_cast<unsigned __int128>(gen_()) * n;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < n) {
      std::uint64_t threshold = (0 - n) % n;
      while (lo < threshold) {
        m = static_cast<unsigned __int128>(gen_()) * n;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Uniform integer on the inclusive range [lo, hi].
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    if (lo > hi) throw ArgumentError("uniform_int: empty range");
    std::uint64_t span =
        static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    return lo + static_cast<std::int64_t>(below(span));
  }

  // Bernoulli(p) using one uniform draw.
  bool bernoulli(double p) { return uniform() < p; }

private:
  std::mt19937_64 gen_;
};

}  // namespace synthlab::rng
