#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>

#include "pidram/prf.hpp"
#include "pidram/stats.hpp"

using namespace pidram;

TEST(Stats, ChiSquareQuantilesDof15) {
  // standard table values for 15 degrees of freedom
  EXPECT_NEAR(chi_square_p_value(24.996, 15), 0.05, 5e-4);
  EXPECT_NEAR(chi_square_p_value(30.578, 15), 0.01, 2e-4);
  EXPECT_NEAR(chi_square_p_value(14.339, 15), 0.50, 2e-3);
}

TEST(Stats, ChiSquareDofTwoIsAnalytic) {
  for (double x : {0.1, 1.0, 5.991, 20.0})
    EXPECT_NEAR(chi_square_p_value(x, 2), std::exp(-x / 2.0), 1e-10);
}

TEST(Stats, ChiSquareEdges) {
  EXPECT_DOUBLE_EQ(chi_square_p_value(0.0, 15), 1.0);
  EXPECT_LT(chi_square_p_value(1000.0, 15), 1e-12);
  EXPECT_GT(chi_square_p_value(1.0, 15), 0.999);
  EXPECT_THROW(gammq(0.0, 1.0), std::invalid_argument);
  EXPECT_THROW(gammq(1.0, -1.0), std::invalid_argument);
  EXPECT_DOUBLE_EQ(gammq(3.5, 0.0), 1.0);
}

TEST(Stats, GammlnMatchesFactorials) {
  // ln((n-1)!) at integer arguments
  EXPECT_NEAR(gammln(1.0), 0.0, 1e-12);
  EXPECT_NEAR(gammln(5.0), std::log(24.0), 1e-10);
  EXPECT_NEAR(gammln(11.0), std::log(3628800.0), 1e-9);
}

TEST(Stats, MonobitCountsOnes) {
  std::vector<uint8_t> bits;
  for (int i = 0; i < 10000; ++i) bits.push_back(i & 1);
  auto r = monobit(bits);
  EXPECT_EQ(r.n, 10000u);
  EXPECT_EQ(r.ones, 5000u);
  EXPECT_DOUBLE_EQ(r.fraction, 0.5);

  auto ones = monobit(std::vector<uint8_t>(64, 1));
  EXPECT_DOUBLE_EQ(ones.fraction, 1.0);
  EXPECT_EQ(monobit({}).n, 0u);
}

TEST(Stats, ChiSquare4AcceptsUniformBits) {
  SplitMix64 rng(2024);
  std::vector<uint8_t> bits;
  while (bits.size() < 100000) {
    uint64_t w = rng.next();
    for (int i = 0; i < 64; ++i) bits.push_back((w >> i) & 1);
  }
  bits.resize(100000);
  auto r = chi_square_4bit(bits);
  EXPECT_EQ(r.symbols, 25000u);
  EXPECT_EQ(r.dof, 15u);
  EXPECT_GT(r.p_value, 0.01);
  uint64_t total = 0;
  for (uint64_t c : r.counts) total += c;
  EXPECT_EQ(total, r.symbols);
}

TEST(Stats, ChiSquare4RejectsConstantBits) {
  auto r = chi_square_4bit(std::vector<uint8_t>(4000, 0));
  EXPECT_EQ(r.counts[0], 1000u);
  EXPECT_LT(r.p_value, 1e-12);
}

TEST(Stats, ChiSquare4DropsIncompleteTail) {
  std::vector<uint8_t> bits(10, 1);  // two full symbols, two stray bits
  auto r = chi_square_4bit(bits);
  EXPECT_EQ(r.symbols, 2u);
  EXPECT_EQ(r.counts[15], 2u);
}

TEST(Stats, ChiSquare4SymbolsAreLsbFirst) {
  // bits 1,0,1,1 form the symbol 0b1101 = 13
  auto r = chi_square_4bit({1, 0, 1, 1});
  EXPECT_EQ(r.counts[13], 1u);
}

TEST(Stats, BitPackingRoundTrips) {
  auto bits = word_to_bits(0xA5, 8);
  ASSERT_EQ(bits.size(), 8u);
  EXPECT_EQ(bits[0], 1u);  // LSB first
  EXPECT_EQ(bits[7], 1u);
  auto bytes = bits_to_bytes(bits);
  ASSERT_EQ(bytes.size(), 1u);
  EXPECT_EQ(bytes[0], 0xA5u);

  auto partial = bits_to_bytes({1, 1, 0, 1});
  ASSERT_EQ(partial.size(), 1u);
  EXPECT_EQ(partial[0], 0x0Bu);
}
