#include <gtest/gtest.h>

#include <array>
#include <map>

#include "dki/corpus/rng.hpp"

namespace dki {
namespace {

// Expected values below come from tests/oracles/generator_oracle.py.

TEST(Rng, Mix64MatchesReference) {
  EXPECT_EQ(mix64(0), 0u);
  EXPECT_EQ(mix64(kGolden), 0xe220a8397b1dcdafULL);
  static_assert(mix64(kGolden) == 0xe220a8397b1dcdafULL);
}

TEST(Rng, StreamZeroIsSplitMix64FromZero) {
  CounterStream s(0);
  EXPECT_EQ(s.next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(s.next(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(s.next(), 0x06c45d188009454fULL);
  EXPECT_EQ(s.counter(), 3u);
}

TEST(Rng, DeriveAndFnvMatchReference) {
  EXPECT_EQ(derive_key(1, 2), 0xf2826f98653e9e57ULL);
  EXPECT_EQ(fnv1a64("syn-T4-s0-0000"), 0xed7c3482b38ca3b3ULL);
  EXPECT_EQ(fnv1a64(""), 0xCBF29CE484222325ULL);
}

TEST(Rng, BelowMatchesReference) {
  CounterStream s(derive_key(mix64(7), 3));
  const std::array<std::uint64_t, 5> expected{0, 1, 5, 2, 9};
  for (auto e : expected) EXPECT_EQ(s.below(10), e);
}

TEST(Rng, BelowStaysInRangeAndCoversIt) {
  CounterStream s(123);
  std::map<std::uint64_t, int> seen;
  for (int i = 0; i < 7000; ++i) {
    const auto v = s.below(7);
    ASSERT_LT(v, 7u);
    ++seen[v];
  }
  EXPECT_EQ(seen.size(), 7u);
  for (const auto& [v, n] : seen) EXPECT_GT(n, 800) << v;
  CounterStream one(5);
  EXPECT_EQ(one.below(1), 0u);
}

TEST(Rng, UnitIsInHalfOpenInterval) {
  CounterStream s(99);
  for (int i = 0; i < 10000; ++i) {
    const double u = s.unit();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Rng, SplitStreamsAreIndependentOfDrawOrder) {
  CounterStream a(42);
  a.next();
  a.next();
  CounterStream b(42);
  EXPECT_EQ(a.split(9).next(), b.split(9).next());
  EXPECT_NE(b.split(9).next(), b.split(10).next());
}

}  // namespace
}  // namespace dki
