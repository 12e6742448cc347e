#pragma once

#include <cstdint>
#include <vector>

#include "pidram/errors.hpp"
#include "pidram/poc.hpp"

namespace pidram {

struct MmioAccess {
  bool is_store = false;
  uint64_t addr = 0;
  uint64_t value = 0;  // stored value, or the value a load returned
  uint64_t start = 0;
  uint64_t end = 0;
};

// Host-side view of the register window. Keeps its own cursor: every
// access occupies cost_cycles of host time, independent of how far the
// device clock ran ahead or behind. Both cursors share the same time
// axis, which is what lets flag reads be answered lazily.
class MmioBus {
 public:
  MmioBus(Poc& poc, uint64_t cost_cycles)
      : poc_(poc), cost_(cost_cycles) {
    if (cost_ < 1) throw ConfigError("mmio: access cost must be >= 1 cycle");
  }

  uint64_t now() const { return cursor_; }
  uint64_t cost_cycles() const { return cost_; }
  void advance(uint64_t n) { cursor_ += n; }
  void sync_to(uint64_t t) {
    if (t > cursor_) cursor_ = t;
  }

  void store(uint64_t addr, uint64_t value) {
    uint64_t s = cursor_;
    cursor_ += cost_;
    poc_.mmio_store(addr, value, cursor_);
    if (logging_) log_.push_back({true, addr, value, s, cursor_});
  }

  uint64_t load(uint64_t addr) {
    uint64_t s = cursor_;
    cursor_ += cost_;
    uint64_t v = poc_.mmio_load(addr, cursor_);
    if (logging_) log_.push_back({false, addr, v, s, cursor_});
    return v;
  }

  Poc& poc() { return poc_; }
  const std::vector<MmioAccess>& log() const { return log_; }
  void clear_log() { log_.clear(); }
  void set_logging(bool on) { logging_ = on; }

 private:
  Poc& poc_;
  uint64_t cost_;
  uint64_t cursor_ = 0;
  bool logging_ = true;
  std::vector<MmioAccess> log_;
};

}  // namespace pidram
