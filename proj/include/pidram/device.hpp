#pragma once

#include <cstdint>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "pidram/bias.hpp"
#include "pidram/command.hpp"
#include "pidram/errors.hpp"
#include "pidram/geometry.hpp"
#include "pidram/prf.hpp"
#include "pidram/trace.hpp"

namespace pidram {

// Knobs for the timing-violation side effects. A tRAS-violating PRE arms
// the bank only if it trails the ACT by at most act_pre_max_gap cycles; the
// following tRP-violating ACT completes the pattern only within
// pre_act_max_gap cycles of that PRE. Wider gaps are plain faults.
struct EffectParams {
  uint32_t act_pre_max_gap = 3;
  uint32_t pre_act_max_gap = 3;

  void validate() const {
    if (act_pre_max_gap < 1 || pre_act_max_gap < 1)
      throw ConfigError("effects: max gaps must be >= 1");
  }
};

struct DeviceStats {
  uint64_t commands = 0;
  uint64_t violations = 0;
  uint64_t multi_row_acts = 0;
  uint64_t cross_subarray_corruptions = 0;
  uint64_t weak_reads = 0;
  uint64_t weak_bit_flips = 0;
};

// Behavioral model of one DRAM device: per-bank state machines, cycle
// timestamps for timing checks, and the two violation side effects
// (multi-row activation copy, charge-starved weak reads). Row storage is
// sparse; rows never written read back as zeros.
class DramDevice {
 public:
  DramDevice(const DeviceGeometry& geo, const TimingParams& timing,
             uint64_t seed, BiasConfig bias = {}, EffectParams fx = {})
      : geo_(geo),
        t_(timing),
        fx_(fx),
        prf_(seed),
        bias_(geo, seed, std::move(bias)),
        banks_(geo.banks),
        store_(geo.banks) {
    geo_.validate();
    t_.validate();
    fx_.validate();
  }

  // Issue one command at the given cycle. Cycles must be strictly
  // increasing across all commands. Bounds and protocol violations throw;
  // timing violations do not, they come back in the response.
  DeviceResponse issue(const DramCommand& cmd, uint64_t cycle) {
    check_bounds(cmd);
    if (last_issue_ && cycle <= *last_issue_)
      throw StateError("command issue cycles must be strictly increasing");

    if (cmd.kind == CmdKind::NOP) {
      commit(cmd, cycle, TimingVerdict::nominal(), SideEffect::NONE);
      return {ResponseKind::DONE, SideEffect::NONE, 0,
              TimingVerdict::nominal()};
    }
    if (cmd.kind == CmdKind::REF) {
      // refresh effects are out of scope; accepted, occupies a cycle
      commit(cmd, cycle, TimingVerdict::nominal(), SideEffect::NONE);
      return {ResponseKind::DONE, SideEffect::NONE, 0,
              TimingVerdict::nominal()};
    }

    BankState& st = banks_[cmd.bank];
    refresh(st, cycle);
    TimingVerdict v = check_timing(cmd, st, t_, cycle);

    DeviceResponse resp;
    switch (cmd.kind) {
      case CmdKind::ACT: resp = do_act(cmd, st, v, cycle); break;
      case CmdKind::PRE: resp = do_pre(cmd, st, v, cycle); break;
      case CmdKind::RD:  resp = do_rd(cmd, st, v); break;
      case CmdKind::WR:  resp = do_wr(cmd, st, v, cycle); break;
      default: break;
    }
    if (!v.ok) ++stats_.violations;
    commit(cmd, cycle, v, resp.effect, st.open_row);
    return resp;
  }

  // Backdoor access for hosts and tests; bypasses timing and bank state.
  uint64_t peek(uint32_t bank, uint32_t row, uint32_t col) const {
    check_addr(bank, row, col);
    const auto& rows = store_[bank];
    auto it = rows.find(row);
    return it == rows.end() ? 0 : it->second[col];
  }

  void poke(uint32_t bank, uint32_t row, uint32_t col, uint64_t value) {
    check_addr(bank, row, col);
    ensure_row(bank, row)[col] = value & geo_.word_mask();
  }

  std::vector<uint64_t> peek_row(uint32_t bank, uint32_t row) const {
    check_addr(bank, row, 0);
    const auto& rows = store_[bank];
    auto it = rows.find(row);
    if (it == rows.end())
      return std::vector<uint64_t>(geo_.columns_per_row, 0);
    return it->second;
  }

  void poke_row(uint32_t bank, uint32_t row,
                const std::vector<uint64_t>& data) {
    check_addr(bank, row, 0);
    if (data.size() != geo_.columns_per_row)
      throw BoundsError("poke_row: word count does not match row size");
    auto& dst = ensure_row(bank, row);
    for (uint32_t c = 0; c < geo_.columns_per_row; ++c)
      dst[c] = data[c] & geo_.word_mask();
  }

  bool row_resident(uint32_t bank, uint32_t row) const {
    check_addr(bank, row, 0);
    return store_[bank].count(row) != 0;
  }

  // Bank status as of `cycle`, with in-flight ACT/PRE settled by time.
  BankStatus status_at(uint32_t bank, uint64_t cycle) const {
    if (bank >= geo_.banks) throw BoundsError("bank out of range");
    BankState st = banks_[bank];
    refresh(st, cycle);
    return st.status;
  }

  const BankState& bank_state(uint32_t bank) const {
    if (bank >= geo_.banks) throw BoundsError("bank out of range");
    return banks_[bank];
  }

  const DeviceGeometry& geometry() const { return geo_; }
  const TimingParams& timing() const { return t_; }
  const EffectParams& effects() const { return fx_; }
  const CellBiasMap& bias_map() const { return bias_; }
  const DeviceStats& stats() const { return stats_; }
  TraceLog& trace() { return trace_; }
  const TraceLog& trace() const { return trace_; }

 private:
  void refresh(BankState& st, uint64_t cycle) const {
    if (st.status == BankStatus::ACTIVATING && st.last_act &&
        cycle >= *st.last_act + t_.tRCD)
      st.status = BankStatus::ACTIVE;
    if (st.status == BankStatus::PRECHARGING && st.last_pre &&
        cycle >= *st.last_pre + t_.tRP)
      st.status = BankStatus::PRECHARGED;
  }

  DeviceResponse do_act(const DramCommand& cmd, BankState& st,
                        const TimingVerdict& v, uint64_t cycle) {
    if (st.status == BankStatus::ACTIVE ||
        st.status == BankStatus::ACTIVATING)
      throw ProtocolError("ACT on bank that already has an open row");

    bool fired = false;
    if (st.clone_armed) {
      bool trp_short = st.last_pre && cycle < *st.last_pre + t_.tRP;
      if (trp_short && cycle - st.clone_pre_cycle <= fx_.pre_act_max_gap) {
        apply_clone(cmd.bank, st.clone_src_row, cmd.row);
        fired = true;
      }
      st.clone_armed = false;
    }
    st.status = BankStatus::ACTIVATING;
    st.open_row = cmd.row;
    st.last_act = cycle;

    if (fired) ++stats_.multi_row_acts;
    SideEffect eff = fired ? SideEffect::MULTI_ROW_ACT : SideEffect::NONE;
    ResponseKind k =
        v.ok ? ResponseKind::DONE : ResponseKind::TIMING_FAULT;
    return {k, eff, 0, v};
  }

  DeviceResponse do_pre(const DramCommand& cmd, BankState& st,
                        const TimingVerdict& v, uint64_t cycle) {
    (void)cmd;
    if (st.open_row) {
      bool tras_short = st.last_act && cycle < *st.last_act + t_.tRAS;
      bool arm = tras_short && cycle - *st.last_act <= fx_.act_pre_max_gap;
      if (arm) {
        st.clone_armed = true;
        st.clone_src_row = *st.open_row;
        st.clone_pre_cycle = cycle;
      }
    } else {
      // redundant PRE: legal, restarts the precharge window, breaks any arm
      st.clone_armed = false;
    }
    st.status = BankStatus::PRECHARGING;
    st.open_row.reset();
    st.last_pre = cycle;
    ResponseKind k =
        v.ok ? ResponseKind::DONE : ResponseKind::TIMING_FAULT;
    return {k, SideEffect::NONE, 0, v};
  }

  DeviceResponse do_rd(const DramCommand& cmd, BankState& st,
                       const TimingVerdict& v) {
    if (!st.open_row)
      throw ProtocolError("RD on bank with no open row");
    uint64_t data = peek(cmd.bank, *st.open_row, cmd.column);
    if (v.ok) return {ResponseKind::DATA, SideEffect::NONE, data, v};
    // charge-starved read: sensing may resolve biased cells either way;
    // the stored row is untouched
    ++stats_.weak_reads;
    data ^= weak_flips(cmd.bank, *st.open_row, cmd.column);
    return {ResponseKind::DATA, SideEffect::WEAK_READ, data, v};
  }

  DeviceResponse do_wr(const DramCommand& cmd, BankState& st,
                       const TimingVerdict& v, uint64_t cycle) {
    if (!st.open_row)
      throw ProtocolError("WR on bank with no open row");
    ensure_row(cmd.bank, *st.open_row)[cmd.column] =
        cmd.wdata & geo_.word_mask();
    st.last_wr = cycle;
    ResponseKind k =
        v.ok ? ResponseKind::DONE : ResponseKind::TIMING_FAULT;
    return {k, SideEffect::NONE, 0, v};
  }

  void apply_clone(uint32_t bank, uint32_t src, uint32_t dst) {
    if (src == dst) return;
    auto& rows = store_[bank];
    if (geo_.same_subarray(src, dst)) {
      auto it = rows.find(src);
      if (it == rows.end())
        rows.erase(dst);  // all-zero source
      else
        rows[dst] = it->second;
    } else {
      // sense amps fight across subarray boundaries; the destination ends
      // up with junk that is stable for a given seed and event order
      ++stats_.cross_subarray_corruptions;
      uint64_t ev = corruption_events_++;
      auto& d = ensure_row(bank, dst);
      for (uint32_t c = 0; c < geo_.columns_per_row; ++c)
        d[c] = prf_.value(prf_domain::kCorruption, ev, c, 0) &
               geo_.word_mask();
    }
  }

  uint64_t weak_flips(uint32_t bank, uint32_t row, uint32_t col) {
    const auto& by_col = row_cells(bank, row);
    auto it = by_col.find(col);
    if (it == by_col.end()) return 0;
    uint64_t mask = 0;
    for (const auto& [bit, p] : it->second) {
      uint64_t key = pack_cell(CellAddr{bank, row, col, bit});
      uint64_t n = ++access_counts_[key];
      if (prf_.uniform(prf_domain::kWeakFlip, key, n, 0) < p) {
        mask |= 1ULL << bit;
        ++stats_.weak_bit_flips;
      }
    }
    return mask;
  }

  using ColIndex =
      std::unordered_map<uint32_t, std::vector<std::pair<uint32_t, double>>>;

  const ColIndex& row_cells(uint32_t bank, uint32_t row) {
    uint64_t key = (static_cast<uint64_t>(bank) << 32) | row;
    auto it = row_cells_.find(key);
    if (it != row_cells_.end()) return it->second;
    ColIndex idx;
    for (const auto& [cell, p] : bias_.row_bias(bank, row))
      idx[cell.column].emplace_back(cell.bit, p);
    return row_cells_.emplace(key, std::move(idx)).first->second;
  }

  std::vector<uint64_t>& ensure_row(uint32_t bank, uint32_t row) {
    auto& rows = store_[bank];
    auto it = rows.find(row);
    if (it == rows.end())
      it = rows.emplace(row, std::vector<uint64_t>(geo_.columns_per_row, 0))
               .first;
    return it->second;
  }

  void check_addr(uint32_t bank, uint32_t row, uint32_t col) const {
    if (bank >= geo_.banks) throw BoundsError("bank out of range");
    if (row >= geo_.rows_per_bank()) throw BoundsError("row out of range");
    if (col >= geo_.columns_per_row)
      throw BoundsError("column out of range");
  }

  void check_bounds(const DramCommand& cmd) const {
    switch (cmd.kind) {
      case CmdKind::ACT:
        check_addr(cmd.bank, cmd.row, 0);
        break;
      case CmdKind::PRE:
        if (cmd.bank >= geo_.banks) throw BoundsError("bank out of range");
        break;
      case CmdKind::RD:
      case CmdKind::WR:
        check_addr(cmd.bank, 0, cmd.column);
        break;
      case CmdKind::REF:
      case CmdKind::NOP:
        break;
    }
  }

  void commit(const DramCommand& cmd, uint64_t cycle, const TimingVerdict& v,
              SideEffect eff, std::optional<uint32_t> open_row = {}) {
    last_issue_ = cycle;
    ++stats_.commands;
    TraceRecord rec;
    rec.cycle = cycle;
    rec.kind = cmd.kind;
    rec.bank = cmd.bank;
    rec.row = cmd.kind == CmdKind::ACT ? cmd.row : open_row.value_or(0);
    rec.column =
        (cmd.kind == CmdKind::RD || cmd.kind == CmdKind::WR) ? cmd.column : 0;
    rec.verdict = v;
    rec.effect = eff;
    trace_.record(rec);
  }

  DeviceGeometry geo_;
  TimingParams t_;
  EffectParams fx_;
  Prf prf_;
  CellBiasMap bias_;
  std::vector<BankState> banks_;
  std::vector<std::unordered_map<uint32_t, std::vector<uint64_t>>> store_;
  std::unordered_map<uint64_t, ColIndex> row_cells_;
  std::unordered_map<uint64_t, uint64_t> access_counts_;
  uint64_t corruption_events_ = 0;
  std::optional<uint64_t> last_issue_;
  DeviceStats stats_;
  TraceLog trace_;
};

}  // namespace pidram
