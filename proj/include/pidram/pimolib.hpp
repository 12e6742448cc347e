#pragma once

#include <algorithm>
#include <cstdint>
#include <string>
#include <vector>

#include "pidram/errors.hpp"
#include "pidram/mmio.hpp"
#include "pidram/poc.hpp"
#include "pidram/supervisor.hpp"

namespace pidram {

enum class BlockingMode : uint8_t { ACK, FINISH };
enum class PollStatus : uint8_t { SET, TIMEOUT };

inline const char* to_string(BlockingMode m) {
  return m == BlockingMode::ACK ? "ACK" : "FINISH";
}

struct PimLibConfig {
  uint64_t poll_timeout_cycles = 2'000'000;
};

struct PimLibStats {
  uint64_t copies = 0;
  uint64_t inits = 0;
  uint64_t rand_bits = 0;
  uint64_t polls = 0;
  uint64_t timeouts = 0;
};

// Client library over the register window. Validates operands through the
// supervisor before any register traffic, then drives the store/poll/load
// protocol. One call moves one row; callers loop for larger buffers.
class PimLib {
 public:
  PimLib(MmioBus& bus, Supervisor& sup, PimLibConfig cfg = {})
      : bus_(bus), sup_(sup), cfg_(cfg) {}

  // Copy one row. Virtual addresses must be row-aligned, allocated, and
  // resolve to the same bank and inferred subarray.
  PollStatus pim_copy(uint64_t src_va, uint64_t dst_va, BlockingMode mode) {
    ensure_finished();
    auto [s, d] = sup_.plan_copy(src_va, dst_va);
    issue(opcode::kRcCopy, global_row(s), global_row(d));
    ++stats_.copies;
    return wait(mode);
  }

  // Fill one row with zeros from its subarray's reserved zero row.
  PollStatus pim_init(uint64_t dst_va, BlockingMode mode) {
    ensure_finished();
    auto [d, z] = sup_.plan_init(dst_va);
    issue(opcode::kRcInit, global_row(z), global_row(d));
    ++stats_.inits;
    return wait(mode);
  }

  // True random bits, gathered in chunks of up to 64 per instruction.
  std::vector<uint8_t> rand_dram(uint64_t n_bits) {
    ensure_finished();
    std::vector<uint8_t> out;
    out.reserve(n_bits);
    while (out.size() < n_bits) {
      uint32_t chunk =
          static_cast<uint32_t>(std::min<uint64_t>(64, n_bits - out.size()));
      issue(opcode::kDrRand, 0, chunk);
      if (poll_flag(flag_bit::kFinish, cfg_.poll_timeout_cycles) !=
          PollStatus::SET)
        throw StateError("random-number operation never finished");
      uint64_t data = bus_.load(mmio_reg::kData);
      for (uint32_t i = 0; i < chunk; ++i)
        out.push_back(static_cast<uint8_t>((data >> i) & 1));
    }
    stats_.rand_bits += n_bits;
    return out;
  }

  // Poll the flag register once per cycle until `flag` is set or
  // timeout_cycles of host time elapse. A timeout of zero never loads.
  PollStatus poll_flag(uint64_t flag, uint64_t timeout_cycles) {
    uint64_t deadline = bus_.now() + timeout_cycles;
    while (bus_.now() < deadline) {
      uint64_t f = bus_.load(mmio_reg::kFlag);
      ++stats_.polls;
      if (f & flag) return PollStatus::SET;
      if (bus_.now() >= deadline) break;
      bus_.advance(1);
    }
    ++stats_.timeouts;
    return PollStatus::TIMEOUT;
  }

  MmioBus& bus() { return bus_; }
  Supervisor& supervisor() { return sup_; }
  const PimLibStats& stats() const { return stats_; }
  bool finish_pending() const { return finish_pending_; }

 private:
  uint32_t global_row(const RowAddr& r) const {
    return r.bank * sup_.geometry().rows_per_bank() + r.row;
  }

  void issue(uint8_t op, uint32_t a, uint32_t b) {
    bus_.store(mmio_reg::kInstr, PocInstruction::encode(op, a, b));
    bus_.store(mmio_reg::kFlag, flag_bit::kStart);
  }

  PollStatus wait(BlockingMode mode) {
    uint64_t flag = mode == BlockingMode::FINISH ? flag_bit::kFinish
                                                 : flag_bit::kAck;
    PollStatus r = poll_flag(flag, cfg_.poll_timeout_cycles);
    finish_pending_ = (mode == BlockingMode::ACK && r == PollStatus::SET);
    return r;
  }

  // An ack-blocked operation may still be running; a start stored while
  // the device is busy would be dropped, so drain the finish flag first.
  void ensure_finished() {
    if (!finish_pending_) return;
    finish_pending_ = false;
    if (poll_flag(flag_bit::kFinish, cfg_.poll_timeout_cycles) !=
        PollStatus::SET)
      throw StateError("previous operation never finished");
  }

  MmioBus& bus_;
  Supervisor& sup_;
  PimLibConfig cfg_;
  PimLibStats stats_;
  bool finish_pending_ = false;
};

}  // namespace pidram
