#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pidram/geometry.hpp"

namespace pidram {

enum class CmdKind : uint8_t { ACT, PRE, RD, WR, REF, NOP };

inline const char* to_string(CmdKind k) {
  switch (k) {
    case CmdKind::ACT: return "ACT";
    case CmdKind::PRE: return "PRE";
    case CmdKind::RD:  return "RD";
    case CmdKind::WR:  return "WR";
    case CmdKind::REF: return "REF";
    case CmdKind::NOP: return "NOP";
  }
  return "?";
}

struct DramCommand {
  CmdKind kind = CmdKind::NOP;
  uint32_t bank = 0;
  uint32_t row = 0;     // ACT only
  uint32_t column = 0;  // RD/WR only
  uint64_t wdata = 0;   // WR only

  static DramCommand act(uint32_t bank, uint32_t row) {
    return {CmdKind::ACT, bank, row, 0, 0};
  }
  static DramCommand pre(uint32_t bank) { return {CmdKind::PRE, bank, 0, 0, 0}; }
  static DramCommand rd(uint32_t bank, uint32_t column) {
    return {CmdKind::RD, bank, 0, column, 0};
  }
  static DramCommand wr(uint32_t bank, uint32_t column, uint64_t data) {
    return {CmdKind::WR, bank, 0, column, data};
  }
  static DramCommand ref() { return {CmdKind::REF, 0, 0, 0, 0}; }
  static DramCommand nop() { return {CmdKind::NOP, 0, 0, 0, 0}; }
};

enum class TimingParamId : uint8_t { tRCD, tRAS, tRP, tWR };

inline const char* to_string(TimingParamId p) {
  switch (p) {
    case TimingParamId::tRCD: return "tRCD";
    case TimingParamId::tRAS: return "tRAS";
    case TimingParamId::tRP:  return "tRP";
    case TimingParamId::tWR:  return "tWR";
  }
  return "?";
}

// Verdict for one issued command. When several constraints are broken at
// once the reported parameter is the one with the largest slack (most
// severe shortfall); slack = earliest legal issue cycle - actual issue cycle.
struct TimingVerdict {
  bool ok = true;
  TimingParamId param = TimingParamId::tRCD;
  uint64_t slack = 0;

  static TimingVerdict nominal() { return {true, TimingParamId::tRCD, 0}; }
  static TimingVerdict violated(TimingParamId p, uint64_t s) {
    return {false, p, s};
  }
};

enum class SideEffect : uint8_t { NONE, MULTI_ROW_ACT, WEAK_READ };

inline const char* to_string(SideEffect e) {
  switch (e) {
    case SideEffect::NONE:          return "NONE";
    case SideEffect::MULTI_ROW_ACT: return "MULTI_ROW_ACT";
    case SideEffect::WEAK_READ:     return "WEAK_READ";
  }
  return "?";
}

enum class ResponseKind : uint8_t { DATA, DONE, TIMING_FAULT };

struct DeviceResponse {
  ResponseKind kind = ResponseKind::DONE;
  SideEffect effect = SideEffect::NONE;
  uint64_t data = 0;           // RD only
  TimingVerdict verdict = TimingVerdict::nominal();
};

enum class BankStatus : uint8_t { PRECHARGED, ACTIVATING, ACTIVE, PRECHARGING };

inline const char* to_string(BankStatus s) {
  switch (s) {
    case BankStatus::PRECHARGED:  return "PRECHARGED";
    case BankStatus::ACTIVATING:  return "ACTIVATING";
    case BankStatus::ACTIVE:      return "ACTIVE";
    case BankStatus::PRECHARGING: return "PRECHARGING";
  }
  return "?";
}

// Per-bank controller-visible state plus the device-internal bookkeeping
// needed to detect the ACT-PRE-ACT multi-row-activation pattern.
struct BankState {
  BankStatus status = BankStatus::PRECHARGED;
  std::optional<uint32_t> open_row;  // set once ACTIVATING or ACTIVE

  // issue cycles of the most recent command of each kind; "none yet"
  // is encoded as no value.
  std::optional<uint64_t> last_act;
  std::optional<uint64_t> last_pre;
  std::optional<uint64_t> last_wr;

  // multi-row-activation arming: a tRAS-violating PRE that follows an ACT
  // closely enough remembers the row that was open; a tRP-violating ACT
  // right after completes the pattern.
  bool clone_armed = false;
  uint32_t clone_src_row = 0;
  uint64_t clone_pre_cycle = 0;
};

// Pure timing check for one command against one bank's history.
// Only inter-command spacing is examined here; protocol legality
// (e.g. RD with no open row) is the device's concern.
inline TimingVerdict check_timing(const DramCommand& cmd, const BankState& st,
                                  const TimingParams& t, uint64_t cycle) {
  uint64_t earliest = 0;
  bool have = false;
  TimingParamId worst = TimingParamId::tRCD;

  auto consider = [&](std::optional<uint64_t> ref, uint32_t gap,
                      TimingParamId id) {
    if (!ref) return;
    uint64_t need = *ref + gap;
    if (!have || need > earliest) {
      earliest = need;
      worst = id;
      have = true;
    }
  };

  switch (cmd.kind) {
    case CmdKind::RD:
    case CmdKind::WR:
      consider(st.last_act, t.tRCD, TimingParamId::tRCD);
      break;
    case CmdKind::PRE:
      consider(st.last_act, t.tRAS, TimingParamId::tRAS);
      consider(st.last_wr, t.tWR, TimingParamId::tWR);
      break;
    case CmdKind::ACT:
      consider(st.last_pre, t.tRP, TimingParamId::tRP);
      break;
    case CmdKind::REF:
    case CmdKind::NOP:
      break;
  }

  if (have && cycle < earliest)
    return TimingVerdict::violated(worst, earliest - cycle);
  return TimingVerdict::nominal();
}

}  // namespace pidram
