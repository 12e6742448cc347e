#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <unordered_map>
#include <vector>

#include "pidram/address_map.hpp"
#include "pidram/bias.hpp"
#include "pidram/command.hpp"
#include "pidram/device.hpp"
#include "pidram/errors.hpp"

namespace pidram {

enum class RngFillPolicy : uint8_t { ON_DEMAND, BACKGROUND };

struct RowAddr {
  uint32_t bank = 0;
  uint32_t row = 0;

  bool operator==(const RowAddr&) const = default;
};

struct MemRequest {
  enum class Kind : uint8_t { READ, WRITE } kind = Kind::READ;
  uint64_t phys_addr = 0;  // byte address, word-aligned
  uint64_t data = 0;       // WRITE payload
};

// First and last command issue cycles of one in-memory operation.
struct OpTiming {
  uint64_t start_cycle = 0;
  uint64_t last_command_cycle = 0;
};

struct ControllerConfig {
  // Minimum spacing between charge-starved activations; the cells need
  // this long to recharge or the harvested bits lose entropy.
  double drange_period_ns = 482.0;
  uint32_t rng_buffer_bits = 1024;
  RngFillPolicy rng_fill_policy = RngFillPolicy::ON_DEMAND;
  // Harvest cells, all in one row, at most 4 distinct columns. Empty
  // until characterization picks them.
  std::vector<CellAddr> rng_cells;
};

struct ControllerStats {
  uint64_t commands_issued = 0;
  uint64_t intended_violations = 0;
  uint64_t reads = 0;
  uint64_t writes = 0;
  uint64_t copy_ops = 0;
  uint64_t init_ops = 0;
  uint64_t harvest_accesses = 0;
  uint64_t bits_harvested = 0;
  uint64_t bits_delivered = 0;
};

// In-order controller owning the command clock. Conventional requests are
// scheduled at nominal timings; the in-memory operations deliberately
// compress ACT/PRE/ACT and issue early RDs to trip the device side
// effects. One request or operation at a time, no reordering.
class MemController {
 public:
  MemController(DramDevice& dev, AddressMap amap, ControllerConfig cfg = {})
      : dev_(dev), amap_(std::move(amap)), cfg_(std::move(cfg)) {
    const auto& t = dev_.timing();
    uint64_t period_cycles = static_cast<uint64_t>(
        std::ceil(cfg_.drange_period_ns / t.clock_period_ns));
    harvest_spacing_ = std::max<uint64_t>(t.tRC, period_cycles);
    if (cfg_.rng_buffer_bits < 64)
      throw ConfigError("controller: rng buffer must hold at least 64 bits");
    if (!cfg_.rng_cells.empty()) validate_cells(cfg_.rng_cells);
  }

  uint64_t now() const { return cycle_; }
  void advance(uint64_t n) { cycle_ += n; }
  void advance_to(uint64_t c) {
    if (c > cycle_) cycle_ = c;
  }

  const DramDevice& device() const { return dev_; }
  const DeviceGeometry& geometry() const { return dev_.geometry(); }
  const TimingParams& timing() const { return dev_.timing(); }
  const AddressMap& address_map() const { return amap_; }
  const ControllerConfig& config() const { return cfg_; }
  const ControllerStats& stats() const { return stats_; }
  uint64_t harvest_spacing() const { return harvest_spacing_; }

  void set_rng_cells(std::vector<CellAddr> cells) {
    validate_cells(cells);
    cfg_.rng_cells = std::move(cells);
    rng_buffer_.clear();
  }

  // Conventional path. Decodes the physical address, opens the row if
  // needed at nominal timing, returns data for READ. The clock advances
  // by the full sequence cost including the read latency.
  uint64_t schedule_access(const MemRequest& req) {
    if (req.phys_addr % dev_.geometry().word_bytes() != 0)
      throw BoundsError("request address not word-aligned");
    PhysAddr pa = amap_.decode(req.phys_addr / dev_.geometry().word_bytes());
    if (req.kind == MemRequest::Kind::READ)
      return read(pa.bank, pa.row, pa.column);
    write(pa.bank, pa.row, pa.column, req.data);
    return 0;
  }

  uint64_t read(uint32_t bank, uint32_t row, uint32_t column) {
    uint64_t rd_at = schedule_open(bank, row);
    auto r = issue_at(DramCommand::rd(bank, column), rd_at);
    expect_ok(r, "scheduler: read");
    cycle_ = rd_at + dev_.timing().tCL;
    ++stats_.reads;
    return r.data;
  }

  void write(uint32_t bank, uint32_t row, uint32_t column, uint64_t value) {
    uint64_t wr_at = schedule_open(bank, row);
    expect_ok(issue_at(DramCommand::wr(bank, column, value), wr_at),
              "scheduler: write");
    ++stats_.writes;
  }

  // In-DRAM row copy: ACT(src), early PRE, early ACT(dst). The early PRE
  // breaks tRAS, the early ACT breaks tRP, and the device carries the
  // source row into the destination. Closed out with a nominal PRE.
  OpTiming exec_rowclone_copy(RowAddr src, RowAddr dst) {
    if (src.bank != dst.bank)
      throw OperandError("rowclone: operands in different banks");
    OpTiming t = violated_copy_sequence(src.bank, src.row, dst.row);
    ++stats_.copy_ops;
    return t;
  }

  // Same sequence sourced from the reserved all-zeros row of dst's
  // subarray; the caller (supervisor) guarantees the reservation.
  OpTiming exec_rowclone_init(RowAddr dst, RowAddr zero_row) {
    if (dst.bank != zero_row.bank)
      throw OperandError("rowclone init: operands in different banks");
    if (!dev_.geometry().same_subarray(dst.row, zero_row.row))
      throw OperandError("rowclone init: zero row not in dst subarray");
    OpTiming t = violated_copy_sequence(dst.bank, zero_row.row, dst.row);
    ++stats_.init_ops;
    return t;
  }

  // Harvest until n bits are gathered or the buffer is full. Each access
  // is a nominal ACT followed by reads inside the tRCD window, one read
  // per distinct harvest column, then a nominal close.
  OpTiming exec_drange_fill(uint64_t n_bits) {
    if (cfg_.rng_cells.empty())
      throw StateError("drange: no rng cells characterized");
    OpTiming t{cycle_, cycle_};
    bool first = true;
    uint64_t gathered = 0;
    while (gathered < n_bits &&
           rng_buffer_.size() < cfg_.rng_buffer_bits) {
      size_t before = rng_buffer_.size();
      OpTiming a = starved_access();
      if (first) {
        t.start_cycle = a.start_cycle;
        first = false;
      }
      t.last_command_cycle = a.last_command_cycle;
      gathered += rng_buffer_.size() - before;
    }
    return t;
  }

  // Probe form used by empirical cell characterization: one starved read
  // of a whole word. Honors the same recharge spacing as harvesting.
  uint64_t weak_read_word(uint32_t bank, uint32_t row, uint32_t column) {
    uint64_t act_at = std::max(prep_closed_bank(bank), next_harvest_act_);
    expect_ok(issue_at(DramCommand::act(bank, row), act_at),
              "probe: activate");
    auto rr = issue_at(DramCommand::rd(bank, column), act_at + 1);
    if (rr.effect != SideEffect::WEAK_READ)
      throw StateError("probe: read was not charge-starved");
    ++stats_.intended_violations;
    uint64_t close_at = act_at + dev_.timing().tRAS;
    expect_ok(issue_at(DramCommand::pre(bank), close_at), "probe: close");
    next_harvest_act_ = act_at + harvest_spacing_;
    return rr.data;
  }

  size_t rng_available() const { return rng_buffer_.size(); }

  // FIFO pop. ON_DEMAND covers a deficit by filling first; BACKGROUND
  // returns what is buffered (short reads are the caller's problem).
  std::vector<uint8_t> rng_pop(uint64_t n) {
    return pop_with_timing(n).bits;
  }

  struct TimedPop {
    std::vector<uint8_t> bits;
    OpTiming timing;
  };

  TimedPop pop_with_timing(uint64_t n) {
    TimedPop out;
    out.timing = {cycle_, cycle_};
    if (cfg_.rng_fill_policy == RngFillPolicy::ON_DEMAND &&
        rng_buffer_.size() < n)
      out.timing = exec_drange_fill(n - rng_buffer_.size());
    uint64_t take = std::min<uint64_t>(n, rng_buffer_.size());
    for (uint64_t i = 0; i < take; ++i) {
      out.bits.push_back(rng_buffer_.front());
      rng_buffer_.pop_front();
    }
    stats_.bits_delivered += take;
    return out;
  }

 private:
  void validate_cells(const std::vector<CellAddr>& cells) const {
    if (cells.empty()) throw ConfigError("rng cells: empty list");
    const auto& geo = dev_.geometry();
    std::vector<uint32_t> cols;
    for (const auto& c : cells) {
      if (c.bank != cells[0].bank || c.row != cells[0].row)
        throw ConfigError("rng cells: all cells must share one row");
      if (c.bank >= geo.banks || c.row >= geo.rows_per_bank() ||
          c.column >= geo.columns_per_row || c.bit >= geo.word_bits)
        throw ConfigError("rng cells: cell out of range");
      bool seen = false;
      for (uint32_t k : cols) seen |= (k == c.column);
      if (!seen) cols.push_back(c.column);
    }
    if (cols.size() > 4)
      throw ConfigError("rng cells: more than 4 distinct columns");
    if (cols.size() >= dev_.timing().tRCD)
      throw ConfigError("rng cells: too many columns for the tRCD window");
  }

  DeviceResponse issue_at(const DramCommand& cmd, uint64_t c) {
    if (c < cycle_) throw StateError("controller: scheduled in the past");
    auto r = dev_.issue(cmd, c);
    cycle_ = c + 1;
    ++stats_.commands_issued;
    return r;
  }

  static void expect_ok(const DeviceResponse& r, const char* what) {
    if (!r.verdict.ok)
      throw StateError(std::string(what) + ": unexpected timing fault");
  }

  // Earliest cycle an ACT can go out nominally; issues a closing PRE
  // first if the bank still has an open row.
  uint64_t prep_closed_bank(uint32_t bank) {
    const auto& t = dev_.timing();
    const BankState& st = dev_.bank_state(bank);
    if (st.open_row) {
      uint64_t pre_at = cycle_;
      if (st.last_act) pre_at = std::max(pre_at, *st.last_act + t.tRAS);
      if (st.last_wr) pre_at = std::max(pre_at, *st.last_wr + t.tWR);
      expect_ok(issue_at(DramCommand::pre(bank), pre_at),
                "scheduler: precharge");
      return pre_at + t.tRP;
    }
    uint64_t act_at = cycle_;
    if (st.last_pre) act_at = std::max(act_at, *st.last_pre + t.tRP);
    return act_at;
  }

  // Bring (bank,row) to a readable/writable state at nominal timing and
  // return the earliest RD/WR issue cycle.
  uint64_t schedule_open(uint32_t bank, uint32_t row) {
    const auto& t = dev_.timing();
    const BankState& st = dev_.bank_state(bank);
    if (st.open_row && *st.open_row == row) {
      uint64_t at = cycle_;
      if (st.last_act) at = std::max(at, *st.last_act + t.tRCD);
      return at;
    }
    uint64_t act_at = prep_closed_bank(bank);
    expect_ok(issue_at(DramCommand::act(bank, row), act_at),
              "scheduler: activate");
    return act_at + t.tRCD;
  }

  OpTiming violated_copy_sequence(uint32_t bank, uint32_t src_row,
                                  uint32_t dst_row) {
    const auto& t = dev_.timing();
    const auto& fx = dev_.effects();
    uint64_t act0 = prep_closed_bank(bank);

    expect_ok(issue_at(DramCommand::act(bank, src_row), act0),
              "rowclone: opening activate");

    uint64_t pre_at = act0 + fx.act_pre_max_gap;
    auto r1 = issue_at(DramCommand::pre(bank), pre_at);
    if (r1.verdict.ok)
      throw StateError("rowclone: arming precharge was not early enough");

    uint64_t act1_at = pre_at + fx.pre_act_max_gap;
    auto r2 = issue_at(DramCommand::act(bank, dst_row), act1_at);
    if (r2.effect != SideEffect::MULTI_ROW_ACT)
      throw StateError("rowclone: pattern did not trigger the row copy");
    stats_.intended_violations += 2;  // the arming PRE and this ACT

    uint64_t close_at = act1_at + t.tRAS;
    expect_ok(issue_at(DramCommand::pre(bank), close_at),
              "rowclone: closing precharge");
    return {act0, close_at};
  }

  OpTiming starved_access() {
    const auto& cells = cfg_.rng_cells;
    uint32_t bank = cells[0].bank;
    uint32_t row = cells[0].row;

    std::vector<uint32_t> cols;
    for (const auto& c : cells) {
      bool seen = false;
      for (uint32_t k : cols) seen |= (k == c.column);
      if (!seen) cols.push_back(c.column);
    }

    uint64_t act_at = std::max(prep_closed_bank(bank), next_harvest_act_);
    expect_ok(issue_at(DramCommand::act(bank, row), act_at),
              "harvest: activate");

    std::unordered_map<uint32_t, uint64_t> data;
    for (size_t i = 0; i < cols.size(); ++i) {
      auto r = issue_at(DramCommand::rd(bank, cols[i]), act_at + 1 + i);
      if (r.effect != SideEffect::WEAK_READ)
        throw StateError("harvest: read was not charge-starved");
      ++stats_.intended_violations;
      data[cols[i]] = r.data;
    }

    uint64_t close_at = act_at + dev_.timing().tRAS;
    expect_ok(issue_at(DramCommand::pre(bank), close_at), "harvest: close");

    next_harvest_act_ = act_at + harvest_spacing_;
    ++stats_.harvest_accesses;

    for (const auto& c : cells) {
      if (rng_buffer_.size() >= cfg_.rng_buffer_bits) break;
      rng_buffer_.push_back(
          static_cast<uint8_t>((data[c.column] >> c.bit) & 1));
      ++stats_.bits_harvested;
    }
    return {act_at, close_at};
  }

  DramDevice& dev_;
  AddressMap amap_;
  ControllerConfig cfg_;
  uint64_t cycle_ = 0;
  uint64_t harvest_spacing_ = 0;
  uint64_t next_harvest_act_ = 0;
  std::deque<uint8_t> rng_buffer_;
  ControllerStats stats_;
};

}  // namespace pidram
