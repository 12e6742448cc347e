#pragma once

#include <cmath>
#include <cstdint>
#include <unordered_map>
#include <vector>

#include "pidram/errors.hpp"
#include "pidram/geometry.hpp"
#include "pidram/prf.hpp"

namespace pidram {

struct CellAddr {
  uint32_t bank = 0;
  uint32_t row = 0;
  uint32_t column = 0;
  uint32_t bit = 0;

  bool operator==(const CellAddr&) const = default;
};

// bank:8 row:24 col:20 bit:12 is ample for any supported geometry
inline uint64_t pack_cell(const CellAddr& c) {
  return (static_cast<uint64_t>(c.bank) << 56) |
         (static_cast<uint64_t>(c.row & 0xFFFFFF) << 32) |
         (static_cast<uint64_t>(c.column & 0xFFFFF) << 12) |
         (c.bit & 0xFFF);
}

struct BiasOverride {
  CellAddr cell;
  double p = 0.0;
};

struct BiasConfig {
  double f_rng = 0.001;     // fraction of cells that flip near-uniformly
  double f_always = 0.01;   // fraction that flip most of the time
  double temperature_scale = 1.0;  // 1.0 = nominal conditions
  std::vector<BiasOverride> overrides;

  void validate() const {
    if (f_rng < 0.0 || f_always < 0.0 || f_rng + f_always > 1.0)
      throw ConfigError("bias: fractions must be >= 0 and sum to <= 1");
    if (temperature_scale <= 0.0)
      throw ConfigError("bias: temperature_scale must be positive");
    for (const auto& o : overrides)
      if (o.p < 0.0 || o.p > 1.0)
        throw ConfigError("bias: override probability out of [0,1]");
  }
};

// Flip probability per cell under charge-starved (tRCD-violating) reads.
// Purely functional in (seed, cell): nothing is stored, every lookup
// recomputes, so the map costs no memory and is identical across runs
// and across lookup orders. Explicit overrides win over the drawn value.
class CellBiasMap {
 public:
  CellBiasMap(const DeviceGeometry& geo, uint64_t seed, BiasConfig cfg = {})
      : geo_(geo), prf_(seed), cfg_(std::move(cfg)) {
    cfg_.validate();
    for (const auto& o : cfg_.overrides) overrides_[pack(o.cell)] = o.p;
  }

  double flip_probability(const CellAddr& c) const {
    auto it = overrides_.find(pack(c));
    if (it != overrides_.end()) return temper(it->second);
    return temper(drawn(c));
  }

  double flip_probability(uint32_t bank, uint32_t row, uint32_t col,
                          uint32_t bit) const {
    return flip_probability(CellAddr{bank, row, col, bit});
  }

  // All cells in one row with nonzero flip probability. Used by the device
  // to memoize per-row weak-read candidates.
  std::vector<std::pair<CellAddr, double>> row_bias(uint32_t bank,
                                                    uint32_t row) const {
    std::vector<std::pair<CellAddr, double>> out;
    for (uint32_t col = 0; col < geo_.columns_per_row; ++col) {
      for (uint32_t bit = 0; bit < geo_.word_bits; ++bit) {
        CellAddr c{bank, row, col, bit};
        double p = flip_probability(c);
        if (p > 0.0) out.emplace_back(c, p);
      }
    }
    return out;
  }

  const BiasConfig& config() const { return cfg_; }
  uint64_t seed() const { return prf_.seed(); }

 private:
  static uint64_t pack(const CellAddr& c) { return pack_cell(c); }

  double drawn(const CellAddr& c) const {
    uint64_t k0 = (static_cast<uint64_t>(c.bank) << 32) | c.row;
    uint64_t k1 = (static_cast<uint64_t>(c.column) << 8) | c.bit;
    double u = prf_.uniform(prf_domain::kCellCategory, k0, k1, 0);
    if (u < cfg_.f_rng) {
      double v = prf_.uniform(prf_domain::kCellProb, k0, k1, 0);
      return 0.45 + 0.10 * v;
    }
    if (u < cfg_.f_rng + cfg_.f_always) {
      double v = prf_.uniform(prf_domain::kCellProb, k0, k1, 0);
      return 0.90 + 0.10 * v;
    }
    return 0.0;
  }

  // Shift the whole map along the logit axis. scale 1 leaves every
  // probability untouched; >1 pushes values toward 0/1, <1 toward 0.5.
  double temper(double p) const {
    double s = cfg_.temperature_scale;
    if (s == 1.0 || p <= 0.0 || p >= 1.0) return p;
    double logit = std::log(p / (1.0 - p));
    return 1.0 / (1.0 + std::exp(-s * logit));
  }

  DeviceGeometry geo_;
  Prf prf_;
  BiasConfig cfg_;
  std::unordered_map<uint64_t, double> overrides_;
};

}  // namespace pidram
