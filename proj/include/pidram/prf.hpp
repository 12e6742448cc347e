#pragma once

#include <cstdint>

// Deterministic pseudo-random primitives. Everything stochastic in the
// simulator (weak-cell sampling, corruption patterns, probe payloads) is
// derived from these so that a (config, seed) pair fully determines a run.

namespace pidram {

// splitmix64 finalizer; full-period 64-bit mixer.
constexpr uint64_t mix64(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Keyed counter-mode PRF. Evaluation order never matters: the output is a
// pure function of (seed, domain, k0, k1, k2).
class Prf {
 public:
  Prf() = default;
  explicit Prf(uint64_t seed) : seed_(seed) {}

  uint64_t seed() const { return seed_; }

  uint64_t value(uint64_t domain, uint64_t k0, uint64_t k1 = 0,
                 uint64_t k2 = 0) const {
    uint64_t h = mix64(seed_ ^ 0x70696472616d00ULL);
    h = mix64(h ^ domain);
    h = mix64(h ^ k0);
    h = mix64(h ^ k1);
    h = mix64(h ^ k2);
    return h;
  }

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform(uint64_t domain, uint64_t k0, uint64_t k1 = 0,
                 uint64_t k2 = 0) const {
    return static_cast<double>(value(domain, k0, k1, k2) >> 11) *
           0x1.0p-53;
  }

 private:
  uint64_t seed_ = 0;
};

// PRF domain separators.
namespace prf_domain {
constexpr uint64_t kCellCategory = 1;
constexpr uint64_t kCellProb = 2;
constexpr uint64_t kWeakFlip = 3;
constexpr uint64_t kCorruption = 4;
constexpr uint64_t kProbePattern = 5;
constexpr uint64_t kWorkload = 6;
}  // namespace prf_domain

// Small sequential generator (splitmix64 stream) for places that want a
// stream rather than a keyed function. Portable, unlike the standard
// library distributions.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next() {
    state_ += 0x9e3779b97f4a7c15ULL;
    uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double next_double() {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  // Unbiased integer in [0, n). n must be nonzero.
  uint64_t below(uint64_t n) {
    uint64_t threshold = (0 - n) % n;
    for (;;) {
      uint64_t r = next();
      if (r >= threshold) return r % n;
    }
  }

 private:
  uint64_t state_;
};

}  // namespace pidram
