#include "doctest.h"

#include <array>
#include <cstdint>
#include <set>

#include "synthlab/rng.hpp"

using namespace synthlab;

// Frozen values below were computed by an independent pure-integer Python
// implementation of splitmix64 / MT19937-64 / the bounded-draw mapping.

TEST_CASE("splitmix64 matches the canonical test vector") {
  std::uint64_t s = 0;
  CHECK(rng::splitmix64_next(s) == 0xe220a8397b1dcdafULL);
  CHECK(rng::splitmix64_next(s) == 0x6e789e6aa1b965f4ULL);
  CHECK(rng::splitmix64_next(s) == 0x06c45d188009454fULL);
}

TEST_CASE("derive_seed is pure and matches the frozen reference") {
  CHECK(rng::derive_seed(42, 0) == 6332618229526065668ULL);
  CHECK(rng::derive_seed(42, 1) == 17532488217563185893ULL);
  CHECK(rng::derive_seed(7, 123456789) == 6095463055192736410ULL);
  CHECK(rng::derive_seed(42, 0) == rng::derive_seed(42, 0));
  CHECK(rng::derive_seed(42, 0) != rng::derive_seed(43, 0));
}

TEST_CASE("tagged derive_seed carves named sub-streams") {
  CHECK(rng::tag_hash("epoch") == 0xfc9697d1196e6ba6ULL);
  CHECK(rng::derive_seed(42, "epoch", 3) == 17247760414281903135ULL);
  CHECK(rng::derive_seed(42, "epoch", 3) != rng::derive_seed(42, "val", 3));
}

TEST_CASE("mt19937_64 raw stream is the standard-specified sequence") {
  rng::Engine e(5489);
  CHECK(e.raw() == 14514284786278117030ULL);

  rng::Engine e2(20240815);
  CHECK(e2.raw() == 16439716813738576600ULL);
  CHECK(e2.raw() == 17619990951091643244ULL);
}

TEST_CASE("uniform() is the top-53-bit mapping, in [0,1)") {
  rng::Engine e(20240815);
  // skip the two raws checked above to exercise a fresh engine instead
  std::array<double, 4> expected = {0.8911988342250919, 0.9551816234174244,
                                    0.36809726305252877, 0.48090274673948386};
  for (double want : expected) {
    double got = e.uniform();
    CHECK(got == want);  // same bits: mapping is fully deterministic
    CHECK(got >= 0.0);
    CHECK(got < 1.0);
  }
}

TEST_CASE("uniform(lo,hi) stays inside the interval") {
  rng::Engine e(1);
  for (int i = 0; i < 1000; ++i) {
    double v = e.uniform(-2.0, 2.0);
    CHECK(v >= -2.0);
    CHECK(v < 2.0);
  }
}

TEST_CASE("bounded integer draws match the frozen reference sequence") {
  rng::Engine e(99);
  std::array<std::uint64_t, 12> expected = {4, 9, 6, 1, 6, 4, 7, 2, 2, 3, 3, 8};
  for (auto want : expected) CHECK(e.below(10) == want);

  rng::Engine e2(99);
  std::array<std::int64_t, 8> range_expected = {91, 196, 136, 34, 131, 99, 155, 59};
  for (auto want : range_expected) CHECK(e2.uniform_int(8, 199) == want);
}

TEST_CASE("uniform_int covers its full inclusive range") {
  rng::Engine e(7);
  std::set<std::int64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    auto v = e.uniform_int(3, 7);
    CHECK(v >= 3);
    CHECK(v <= 7);
    seen.insert(v);
  }
  CHECK(seen.size() == 5);
}

TEST_CASE("same seed yields identical streams; different seeds diverge") {
  rng::Engine a(123), b(123), c(124);
  bool all_equal = true, any_diff = false;
  for (int i = 0; i < 100; ++i) {
    auto x = a.raw(), y = b.raw(), z = c.raw();
    all_equal = all_equal && (x == y);
    any_diff = any_diff || (x != z);
  }
  CHECK(all_equal);
  CHECK(any_diff);
}

TEST_CASE("degenerate argument errors") {
  rng::Engine e(1);
  CHECK_THROWS_AS(e.below(0), ArgumentError);
  CHECK_THROWS_AS(e.uniform_int(5, 4), ArgumentError);
}
