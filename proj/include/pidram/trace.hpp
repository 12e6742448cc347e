#pragma once

#include <cstdint>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "pidram/command.hpp"

namespace pidram {

// One issued command as seen by the device, with its timing verdict and
// any triggered side effect. Serialized as
//   cycle,kind,bank,row,col,verdict,effect
// where verdict is OK or VIOLATED:<param>:<slack>.
struct TraceRecord {
  uint64_t cycle = 0;
  CmdKind kind = CmdKind::NOP;
  uint32_t bank = 0;
  uint32_t row = 0;
  uint32_t column = 0;
  TimingVerdict verdict = TimingVerdict::nominal();
  SideEffect effect = SideEffect::NONE;

  std::string verdict_str() const {
    if (verdict.ok) return "OK";
    std::ostringstream os;
    os << "VIOLATED:" << to_string(verdict.param) << ":" << verdict.slack;
    return os.str();
  }

  std::string to_csv() const {
    std::ostringstream os;
    os << cycle << ',' << to_string(kind) << ',' << bank << ',' << row << ','
       << column << ',' << verdict_str() << ',' << to_string(effect);
    return os.str();
  }
};

class TraceLog {
 public:
  explicit TraceLog(size_t capacity = 0) : capacity_(capacity) {}

  void set_enabled(bool on) { enabled_ = on; }
  bool enabled() const { return enabled_; }

  void record(const TraceRecord& r) {
    ++total_;
    if (!enabled_) return;
    if (capacity_ && records_.size() >= capacity_) {
      records_.erase(records_.begin());  // keep the newest
      ++dropped_;
    }
    records_.push_back(r);
  }

  const std::vector<TraceRecord>& records() const { return records_; }
  uint64_t total_recorded() const { return total_; }
  uint64_t dropped() const { return dropped_; }
  void clear() { records_.clear(); }

  void dump(std::ostream& os) const {
    os << "cycle,kind,bank,row,col,verdict,effect\n";
    for (const auto& r : records_) os << r.to_csv() << '\n';
  }

 private:
  bool enabled_ = true;
  size_t capacity_ = 0;  // 0 = unbounded
  std::vector<TraceRecord> records_;
  uint64_t total_ = 0;
  uint64_t dropped_ = 0;
};

}  // namespace pidram
