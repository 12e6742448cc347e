#include <gtest/gtest.h>

#include <set>

#include "pidram/prf.hpp"

using namespace pidram;

TEST(SplitMix64, MatchesReferenceSequence) {
  SplitMix64 g(0);
  EXPECT_EQ(g.next(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(g.next(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(g.next(), 0x06c45d188009454fULL);
}

TEST(SplitMix64, BelowStaysInRangeAndCoversValues) {
  SplitMix64 g(7);
  std::set<uint64_t> seen;
  for (int i = 0; i < 2000; ++i) {
    uint64_t v = g.below(13);
    ASSERT_LT(v, 13u);
    seen.insert(v);
  }
  EXPECT_EQ(seen.size(), 13u);
}

TEST(SplitMix64, NextDoubleInUnitInterval) {
  SplitMix64 g(42);
  for (int i = 0; i < 1000; ++i) {
    double d = g.next_double();
    ASSERT_GE(d, 0.0);
    ASSERT_LT(d, 1.0);
  }
}

TEST(Prf, PureFunctionOfSeedAndKeys) {
  Prf a(99), b(99), c(100);
  EXPECT_EQ(a.value(prf_domain::kWeakFlip, 1, 2, 3),
            b.value(prf_domain::kWeakFlip, 1, 2, 3));
  EXPECT_NE(a.value(prf_domain::kWeakFlip, 1, 2, 3),
            c.value(prf_domain::kWeakFlip, 1, 2, 3));
}

TEST(Prf, DomainsAreSeparated) {
  Prf p(5);
  EXPECT_NE(p.value(prf_domain::kCellCategory, 0, 0, 0),
            p.value(prf_domain::kCellProb, 0, 0, 0));
  EXPECT_NE(p.value(prf_domain::kWeakFlip, 7), p.value(prf_domain::kWorkload, 7));
}

TEST(Prf, UniformIsHalfOnAverage) {
  Prf p(11);
  double sum = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) sum += p.uniform(prf_domain::kWorkload, i);
  EXPECT_NEAR(sum / n, 0.5, 0.01);
}

TEST(Prf, OrderIndependent) {
  Prf p(3);
  uint64_t late = p.value(prf_domain::kCorruption, 1000, 1, 2);
  uint64_t early = p.value(prf_domain::kCorruption, 0, 0, 0);
  Prf q(3);
  EXPECT_EQ(q.value(prf_domain::kCorruption, 0, 0, 0), early);
  EXPECT_EQ(q.value(prf_domain::kCorruption, 1000, 1, 2), late);
}
