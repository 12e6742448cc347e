#pragma once

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pidram/controller.hpp"
#include "pidram/errors.hpp"

namespace pidram {

namespace mmio_reg {
constexpr uint64_t kInstr = 0x00;
constexpr uint64_t kFlag = 0x08;
constexpr uint64_t kData = 0x10;
}  // namespace mmio_reg

namespace flag_bit {
constexpr uint64_t kStart = 1ULL << 0;
constexpr uint64_t kAck = 1ULL << 1;
constexpr uint64_t kFinish = 1ULL << 2;
}  // namespace flag_bit

namespace opcode {
constexpr uint8_t kRcCopy = 0x01;
constexpr uint8_t kRcInit = 0x02;
constexpr uint8_t kDrRand = 0x03;
}  // namespace opcode

namespace poc_error {
constexpr uint64_t kUnknownOpcode = 0xDEAD0001;
constexpr uint64_t kOperandRange = 0xDEAD0002;
constexpr uint64_t kUnsupportedOperands = 0xDEAD0003;
constexpr uint64_t kRngUnavailable = 0xDEAD0004;
}  // namespace poc_error

// 64-bit instruction word: opcode in [63:56], operand a in [55:28],
// operand b in [27:0]. Rows are addressed globally as
// bank * rows_per_bank + row.
struct PocInstruction {
  uint8_t opcode = 0;
  uint32_t operand_a = 0;
  uint32_t operand_b = 0;

  static constexpr uint32_t kOperandMask = (1U << 28) - 1;

  static uint64_t encode(uint8_t op, uint32_t a, uint32_t b) {
    return (static_cast<uint64_t>(op) << 56) |
           (static_cast<uint64_t>(a & kOperandMask) << 28) |
           (b & kOperandMask);
  }

  static PocInstruction decode(uint64_t word) {
    PocInstruction in;
    in.opcode = static_cast<uint8_t>(word >> 56);
    in.operand_a = static_cast<uint32_t>((word >> 28) & kOperandMask);
    in.operand_b = static_cast<uint32_t>(word & kOperandMask);
    return in;
  }
};

struct FlagEvent {
  uint64_t cycle = 0;
  uint64_t flags = 0;
};

struct PocStats {
  uint64_t copies = 0;
  uint64_t inits = 0;
  uint64_t rands = 0;
  uint64_t errors = 0;
  uint64_t ignored_starts = 0;
};

// Register-programmed front end for the in-memory operations. The host
// talks to it through three 64-bit registers; setting the start flag
// latches the instruction and runs it on the controller. Flag reads are
// answered against the caller's own clock, so a host that polls while
// the operation is conceptually in flight sees start, then ack, then
// finish in order.
class Poc {
 public:
  explicit Poc(MemController& ctrl) : ctrl_(ctrl) {}

  void mmio_store(uint64_t addr, uint64_t value, uint64_t now) {
    switch (addr) {
      case mmio_reg::kInstr:
        instr_ = value;
        return;
      case mmio_reg::kFlag:
        if (value & flag_bit::kStart) {
          if (executed_ && now < finish_cycle_) {
            ++stats_.ignored_starts;  // device busy, start dropped
            return;
          }
          start_seen_ = now;
          events_.push_back({now, flag_bit::kStart});
          execute(now);
        }
        return;
      case mmio_reg::kData:
        throw ProtocolError("data register is read-only");
      default:
        throw ProtocolError("store to unmapped register");
    }
  }

  uint64_t mmio_load(uint64_t addr, uint64_t now) const {
    switch (addr) {
      case mmio_reg::kInstr:
        return instr_;
      case mmio_reg::kFlag:
        return flags_at(now);
      case mmio_reg::kData:
        if (!executed_ || now < finish_cycle_) return prev_data_;
        return data_;
      default:
        throw ProtocolError("load from unmapped register");
    }
  }

  uint64_t flags_at(uint64_t now) const {
    uint64_t f = 0;
    if (start_seen_ && now >= *start_seen_ &&
        (!executed_ || now < ack_cycle_))
      f |= flag_bit::kStart;
    if (executed_) {
      if (now >= ack_cycle_) f |= flag_bit::kAck;
      if (now >= finish_cycle_) f |= flag_bit::kFinish;
    }
    return f;
  }

  bool busy(uint64_t now) const { return executed_ && now < finish_cycle_; }
  uint64_t ack_cycle() const { return ack_cycle_; }
  uint64_t finish_cycle() const { return finish_cycle_; }
  const std::vector<FlagEvent>& events() const { return events_; }
  const PocStats& stats() const { return stats_; }
  MemController& controller() { return ctrl_; }

 private:
  void execute(uint64_t now) {
    prev_data_ = (executed_ && now >= finish_cycle_) ? data_ : prev_data_;
    PocInstruction in = PocInstruction::decode(instr_);
    const auto& geo = ctrl_.geometry();

    switch (in.opcode) {
      case opcode::kRcCopy:
      case opcode::kRcInit: {
        uint64_t total = geo.total_rows();
        if (in.operand_a >= total || in.operand_b >= total)
          return fail(poc_error::kOperandRange, now);
        uint32_t rpb = geo.rows_per_bank();
        RowAddr a{in.operand_a / rpb, in.operand_a % rpb};
        RowAddr b{in.operand_b / rpb, in.operand_b % rpb};
        if (a.bank != b.bank)
          return fail(poc_error::kUnsupportedOperands, now);
        if (in.opcode == opcode::kRcInit &&
            !geo.same_subarray(a.row, b.row))
          return fail(poc_error::kUnsupportedOperands, now);
        uint64_t dispatch = dispatch_at(now);
        // a = src (zero row for init), b = dst
        OpTiming t = in.opcode == opcode::kRcCopy
                         ? ctrl_.exec_rowclone_copy(a, b)
                         : ctrl_.exec_rowclone_init(b, a);
        complete(dispatch, t.last_command_cycle);
        if (in.opcode == opcode::kRcCopy) ++stats_.copies;
        else ++stats_.inits;
        return;
      }
      case opcode::kDrRand: {
        uint32_t n = in.operand_b;
        if (n < 1 || n > 64) return fail(poc_error::kOperandRange, now);
        if (ctrl_.config().rng_cells.empty())
          return fail(poc_error::kRngUnavailable, now);
        uint64_t dispatch = dispatch_at(now);
        auto p = ctrl_.pop_with_timing(n);
        uint64_t v = 0;
        for (size_t i = 0; i < p.bits.size(); ++i)
          v |= static_cast<uint64_t>(p.bits[i]) << i;
        data_ = v;
        complete(dispatch, p.timing.last_command_cycle);
        ++stats_.rands;
        return;
      }
      default:
        return fail(poc_error::kUnknownOpcode, now);
    }
  }

  uint64_t dispatch_at(uint64_t now) {
    ctrl_.advance_to(now);
    ctrl_.advance(1);
    return ctrl_.now();
  }

  void complete(uint64_t dispatch, uint64_t last_cmd) {
    executed_ = true;
    ack_cycle_ = dispatch;
    // finish strictly after ack even when the operation needed no
    // device commands (buffer-served random numbers)
    finish_cycle_ = std::max(dispatch + 1, last_cmd);
    events_.push_back({ack_cycle_, flag_bit::kAck});
    events_.push_back({finish_cycle_, flag_bit::kAck | flag_bit::kFinish});
  }

  void fail(uint64_t code, uint64_t now) {
    data_ = code;
    executed_ = true;
    ack_cycle_ = finish_cycle_ = now + 1;
    events_.push_back({ack_cycle_, flag_bit::kAck | flag_bit::kFinish});
    ++stats_.errors;
  }

  MemController& ctrl_;
  uint64_t instr_ = 0;
  uint64_t data_ = 0;
  uint64_t prev_data_ = 0;
  bool executed_ = false;
  uint64_t ack_cycle_ = 0;
  uint64_t finish_cycle_ = 0;
  std::optional<uint64_t> start_seen_;
  PocStats stats_;
  std::vector<FlagEvent> events_;
};

}  // namespace pidram
