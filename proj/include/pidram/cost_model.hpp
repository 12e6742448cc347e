#pragma once

#include <cmath>
#include <cstdint>

#include "pidram/errors.hpp"

namespace pidram {

struct SpeedupTargets {
  double copy_no_flush = 118.5;
  double copy_flush = 14.6;
  double init_no_flush = 88.7;
  double init_flush = 12.6;

  void validate() const {
    if (copy_no_flush <= 0 || copy_flush <= 0 || init_no_flush <= 0 ||
        init_flush <= 0)
      throw ConfigError("speedup targets must be positive");
  }
};

// Analytical CPU baseline: a streaming copy or memset at a fixed rate.
struct CpuCostModel {
  double copy_bytes_per_ns = 0.0;
  double init_bytes_per_ns = 0.0;

  double copy_ns(uint64_t bytes) const {
    return static_cast<double>(bytes) / copy_bytes_per_ns;
  }
  double init_ns(uint64_t bytes) const {
    return static_cast<double>(bytes) / init_bytes_per_ns;
  }
  void validate() const {
    if (copy_bytes_per_ns <= 0 || init_bytes_per_ns <= 0)
      throw ConfigError("cpu cost model: rates must be positive");
  }
};

// Pick CPU rates so one row of in-memory work shows exactly the no-flush
// speedups against the measured row latency.
inline CpuCostModel solve_cpu_rates(uint64_t row_bytes, double pim_row_ns,
                                    const SpeedupTargets& t) {
  if (pim_row_ns <= 0) throw ConfigError("row latency must be positive");
  CpuCostModel m;
  m.copy_bytes_per_ns = row_bytes / (t.copy_no_flush * pim_row_ns);
  m.init_bytes_per_ns = row_bytes / (t.init_no_flush * pim_row_ns);
  return m;
}

// One flush knob serves both flushed targets; they pin slightly different
// per-block costs, and the geometric mean stays inside both tolerance
// bands.
inline double solve_flush_cost_per_block(uint64_t row_bytes,
                                         double pim_row_ns,
                                         const CpuCostModel& m,
                                         const SpeedupTargets& t,
                                         uint64_t block_bytes) {
  double blocks = static_cast<double>(row_bytes) / block_bytes;
  double f_copy =
      (m.copy_ns(row_bytes) / t.copy_flush - pim_row_ns) / blocks;
  double f_init =
      (m.init_ns(row_bytes) / t.init_flush - pim_row_ns) / blocks;
  if (f_copy <= 0 || f_init <= 0)
    throw ConfigError("flush cost calibration is infeasible");
  return std::sqrt(f_copy * f_init);
}

}  // namespace pidram
