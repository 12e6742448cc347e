#include <gtest/gtest.h>

#include "pidram/geometry.hpp"

using namespace pidram;

TEST(Geometry, DefaultShape) {
  DeviceGeometry g;
  EXPECT_EQ(g.banks, 8u);
  EXPECT_EQ(g.rows_per_bank(), 4096u);
  EXPECT_EQ(g.total_rows(), 32768u);
  EXPECT_EQ(g.row_bytes(), 8192u);
  EXPECT_EQ(g.word_bytes(), 8u);
  EXPECT_EQ(g.capacity_bytes(), 268435456u);  // 256 MiB
}

TEST(Geometry, SubarrayIndexing) {
  DeviceGeometry g;
  EXPECT_EQ(g.subarray_of(0), 0u);
  EXPECT_EQ(g.subarray_of(511), 0u);
  EXPECT_EQ(g.subarray_of(512), 1u);
  EXPECT_EQ(g.subarray_of(4095), 7u);
  EXPECT_TRUE(g.same_subarray(100, 511));
  EXPECT_FALSE(g.same_subarray(511, 512));
}

TEST(Geometry, WordMask) {
  DeviceGeometry g;
  EXPECT_EQ(g.word_mask(), ~0ULL);
  g.word_bits = 16;
  EXPECT_EQ(g.word_mask(), 0xFFFFULL);
}

TEST(Geometry, ValidateRejectsBadShapes) {
  DeviceGeometry g;
  g.banks = 0;
  EXPECT_THROW(g.validate(), ConfigError);
  g = DeviceGeometry{};
  g.word_bits = 65;
  EXPECT_THROW(g.validate(), ConfigError);
  g = DeviceGeometry{};
  g.word_bits = 12;
  EXPECT_THROW(g.validate(), ConfigError);
}

TEST(Timing, DefaultsAreConsistent) {
  TimingParams t;
  EXPECT_NO_THROW(t.validate());
  EXPECT_EQ(t.tRC, 39u);
  EXPECT_GE(t.tRC, t.tRAS + t.tRP);
  EXPECT_DOUBLE_EQ(t.clock_period_ns, 1.25);
}

TEST(Timing, ValidateRejectsInconsistency) {
  TimingParams t;
  t.tRC = 10;  // < tRAS + tRP
  EXPECT_THROW(t.validate(), ConfigError);
  t = TimingParams{};
  t.clock_period_ns = 0;
  EXPECT_THROW(t.validate(), ConfigError);
  t = TimingParams{};
  t.tRCD = 0;
  EXPECT_THROW(t.validate(), ConfigError);
}
