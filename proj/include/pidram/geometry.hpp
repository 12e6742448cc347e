#pragma once

#include <cstdint>

#include "pidram/errors.hpp"

namespace pidram {

// Static organization of the modeled device. A row is addressed as
// (bank, row-in-bank); row index r belongs to subarray r / rows_per_subarray.
struct DeviceGeometry {
  uint32_t banks = 8;
  uint32_t subarrays_per_bank = 8;
  uint32_t rows_per_subarray = 512;
  uint32_t columns_per_row = 1024;  // device words per row
  uint32_t word_bits = 64;

  uint32_t rows_per_bank() const { return subarrays_per_bank * rows_per_subarray; }
  uint64_t total_rows() const {
    return static_cast<uint64_t>(banks) * rows_per_bank();
  }
  uint64_t row_bits() const {
    return static_cast<uint64_t>(columns_per_row) * word_bits;
  }
  uint64_t row_bytes() const { return row_bits() / 8; }
  uint64_t word_bytes() const { return word_bits / 8; }
  uint64_t capacity_bytes() const { return total_rows() * row_bytes(); }

  uint32_t subarray_of(uint32_t row) const { return row / rows_per_subarray; }
  bool same_subarray(uint32_t row_a, uint32_t row_b) const {
    return subarray_of(row_a) == subarray_of(row_b);
  }

  uint64_t word_mask() const {
    return word_bits >= 64 ? ~0ULL : ((1ULL << word_bits) - 1);
  }

  void validate() const {
    if (banks < 1 || subarrays_per_bank < 1 || rows_per_subarray < 1 ||
        columns_per_row < 1 || word_bits < 1)
      throw ConfigError("geometry: all counts must be >= 1");
    if (word_bits > 64)
      throw ConfigError("geometry: word_bits > 64 not supported");
    if (word_bits % 8 != 0)
      throw ConfigError("geometry: word_bits must be a multiple of 8");
  }
};

// JEDEC-style command-to-command constraints, in device clock ticks.
// Defaults approximate DDR3-1600 (tCK = 1.25 ns).
struct TimingParams {
  uint32_t tRCD = 11;
  uint32_t tRAS = 28;
  uint32_t tRP = 11;
  uint32_t tWR = 12;
  uint32_t tCL = 11;
  uint32_t tRC = 39;
  double clock_period_ns = 1.25;

  void validate() const {
    if (tRCD < 1 || tRAS < 1 || tRP < 1 || tWR < 1 || tCL < 1 || tRC < 1)
      throw ConfigError("timing: all parameters must be >= 1");
    if (tRC < tRAS + tRP)
      throw ConfigError("timing: tRC must be >= tRAS + tRP");
    if (clock_period_ns <= 0.0)
      throw ConfigError("timing: clock_period_ns must be positive");
  }
};

}  // namespace pidram
