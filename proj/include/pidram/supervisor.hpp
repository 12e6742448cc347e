#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "pidram/address_map.hpp"
#include "pidram/controller.hpp"
#include "pidram/device.hpp"
#include "pidram/errors.hpp"
#include "pidram/prf.hpp"

namespace pidram {

struct RowRange {
  uint32_t first = 0;
  uint32_t last = 0;  // inclusive

  bool contains(uint32_t row) const { return row >= first && row <= last; }
  bool operator==(const RowRange&) const = default;
};

// Inferred row-interval partition per bank. This is what the rest of the
// stack believes about subarray boundaries; it may be coarser than the
// device's ground truth if discovery was under-sampled.
class SubarrayMap {
 public:
  SubarrayMap() = default;
  explicit SubarrayMap(std::vector<std::vector<RowRange>> banks)
      : banks_(std::move(banks)) {}

  static SubarrayMap from_geometry(const DeviceGeometry& geo) {
    std::vector<std::vector<RowRange>> banks(geo.banks);
    for (uint32_t b = 0; b < geo.banks; ++b) {
      for (uint32_t s = 0; s < geo.subarrays_per_bank; ++s) {
        uint32_t first = s * geo.rows_per_subarray;
        banks[b].push_back({first, first + geo.rows_per_subarray - 1});
      }
    }
    return SubarrayMap(std::move(banks));
  }

  uint32_t banks() const { return static_cast<uint32_t>(banks_.size()); }

  const std::vector<RowRange>& intervals(uint32_t bank) const {
    if (bank >= banks_.size()) throw BoundsError("bank out of range");
    return banks_[bank];
  }

  uint32_t subarray_of(uint32_t bank, uint32_t row) const {
    const auto& iv = intervals(bank);
    size_t lo = 0, hi = iv.size();
    while (lo < hi) {
      size_t mid = (lo + hi) / 2;
      if (row < iv[mid].first) hi = mid;
      else if (row > iv[mid].last) lo = mid + 1;
      else return static_cast<uint32_t>(mid);
    }
    throw BoundsError("row not covered by subarray map");
  }

  bool same_subarray(uint32_t bank, uint32_t r1, uint32_t r2) const {
    return subarray_of(bank, r1) == subarray_of(bank, r2);
  }

  // intervals must partition [0, rows_per_bank) per bank, sorted
  void validate(const DeviceGeometry& geo) const {
    if (banks_.size() != geo.banks)
      throw ConfigError("subarray map: bank count mismatch");
    for (uint32_t b = 0; b < geo.banks; ++b) {
      uint32_t expect = 0;
      for (const auto& r : banks_[b]) {
        if (r.first != expect || r.last < r.first)
          throw ConfigError("subarray map: intervals must partition rows");
        expect = r.last + 1;
      }
      if (expect != geo.rows_per_bank())
        throw ConfigError("subarray map: intervals must cover all rows");
    }
  }

  std::string serialize() const {
    std::ostringstream os;
    for (size_t b = 0; b < banks_.size(); ++b)
      for (const auto& r : banks_[b])
        os << b << ": " << r.first << ".." << r.last << '\n';
    return os.str();
  }

  static SubarrayMap parse(const std::string& text,
                           const DeviceGeometry& geo) {
    std::vector<std::vector<RowRange>> banks(geo.banks);
    std::istringstream is(text);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty()) continue;
      uint32_t bank = 0, first = 0, last = 0;
      char c1 = 0, d1 = 0, d2 = 0;
      std::istringstream ls(line);
      if (!(ls >> bank >> c1 >> first >> d1 >> d2 >> last) || c1 != ':' ||
          d1 != '.' || d2 != '.')
        throw ConfigError("subarray map: bad line '" + line + "'");
      if (bank >= geo.banks)
        throw ConfigError("subarray map: bank out of range");
      banks[bank].push_back({first, last});
    }
    SubarrayMap m(std::move(banks));
    m.validate(geo);
    return m;
  }

  bool operator==(const SubarrayMap&) const = default;

 private:
  std::vector<std::vector<RowRange>> banks_;
};

enum class Purpose : uint8_t { OPERAND_PAIR, SINGLE, ZERO_ROW };

inline const char* to_string(Purpose p) {
  switch (p) {
    case Purpose::OPERAND_PAIR: return "OPERAND_PAIR";
    case Purpose::SINGLE:       return "SINGLE";
    case Purpose::ZERO_ROW:     return "ZERO_ROW";
  }
  return "?";
}

struct Allocation {
  uint64_t id = 0;
  uint32_t bank = 0;
  uint32_t subarray = 0;  // index into the inferred map
  std::vector<uint32_t> rows;
  Purpose purpose = Purpose::SINGLE;
  uint64_t bytes = 0;     // requested bytes per region
  uint64_t va_base = 0;   // first region
  uint64_t va_dst = 0;    // second region (OPERAND_PAIR only)

  size_t rows_per_region() const {
    return purpose == Purpose::OPERAND_PAIR ? rows.size() / 2 : rows.size();
  }
};

enum class CoherenceMode : uint8_t { NONE, FLUSH_ALL_BLOCKS };

struct CoherenceModel {
  double flush_cost_per_block_ns = 5.0;
  uint64_t block_size_bytes = 64;
  double dirty_fraction = 1.0;  // recorded; every block is queried anyway

  void validate() const {
    if (flush_cost_per_block_ns < 0)
      throw ConfigError("coherence: negative flush cost");
    if (block_size_bytes == 0 ||
        (block_size_bytes & (block_size_bytes - 1)) != 0)
      throw ConfigError("coherence: block size must be a power of two");
    if (dirty_fraction < 0.0 || dirty_fraction > 1.0)
      throw ConfigError("coherence: dirty_fraction out of [0,1]");
  }
};

struct DiscoverConfig {
  enum class Strategy : uint8_t { BINARY, RANDOM } strategy =
      Strategy::BINARY;
  uint64_t trials_per_boundary = 1;  // RANDOM: adjacent probes per bank
  uint64_t seed = 1;
};

struct DiscoveryResult {
  SubarrayMap map;
  uint64_t probes_total = 0;
  uint64_t probes_max_per_bank = 0;
};

struct SupervisorConfig {
  CoherenceModel coherence;
  uint64_t va_base = 0x10000000;  // start of the virtual arena
};

// Memory management around the in-DRAM copy constraint: hands out
// same-subarray row groups, keeps one all-zeros row per subarray as the
// init source, discovers subarray boundaries empirically, and prices
// cache flushes for the benchmarks.
class Supervisor {
 public:
  Supervisor(DramDevice& dev, AddressMap amap, SubarrayMap map,
             SupervisorConfig cfg = {})
      : dev_(dev),
        amap_(std::move(amap)),
        map_(std::move(map)),
        cfg_(cfg),
        next_va_(cfg.va_base) {
    cfg_.coherence.validate();
    map_.validate(dev_.geometry());
    used_.assign(dev_.geometry().banks,
                 std::vector<bool>(dev_.geometry().rows_per_bank(), false));
  }

  const SubarrayMap& map() const { return map_; }
  const AddressMap& address_map() const { return amap_; }
  const CoherenceModel& coherence() const { return cfg_.coherence; }
  const DeviceGeometry& geometry() const { return dev_.geometry(); }

  void set_map(SubarrayMap m) {
    if (!allocations_.empty())
      throw StateError("cannot replace subarray map with live allocations");
    m.validate(dev_.geometry());
    map_ = std::move(m);
    zero_rows_.clear();
  }

  // ---- address translation --------------------------------------------

  PhysAddr phys_to_dram(uint64_t byte_addr) const {
    uint64_t wb = dev_.geometry().word_bytes();
    if (byte_addr % wb != 0)
      throw BoundsError("physical address not word-aligned");
    return amap_.decode(byte_addr / wb);
  }

  uint64_t dram_to_phys(const PhysAddr& pa) const {
    return amap_.encode(pa) * dev_.geometry().word_bytes();
  }

  // ---- allocation ------------------------------------------------------

  const Allocation& alloc_align(uint64_t bytes, Purpose purpose) {
    if (purpose == Purpose::ZERO_ROW)
      throw OperandError("zero rows are reserved internally");
    if (bytes == 0) throw BoundsError("alloc_align: zero bytes");
    uint64_t row_bytes = dev_.geometry().row_bytes();
    uint64_t region_rows = (bytes + row_bytes - 1) / row_bytes;
    uint64_t need = purpose == Purpose::OPERAND_PAIR ? 2 * region_rows
                                                     : region_rows;

    auto spot = find_run(need);
    if (!spot)
      throw AllocationError("no subarray with " + std::to_string(need) +
                            " free contiguous rows");
    auto [bank, sub, first] = *spot;
    reserve_zero_row(bank, sub);

    Allocation a;
    a.id = next_id_++;
    a.bank = bank;
    a.subarray = sub;
    a.purpose = purpose;
    a.bytes = bytes;
    for (uint64_t i = 0; i < need; ++i) {
      used_[bank][first + i] = true;
      a.rows.push_back(first + static_cast<uint32_t>(i));
    }
    a.va_base = next_va_;
    next_va_ += region_rows * row_bytes;
    if (purpose == Purpose::OPERAND_PAIR) {
      a.va_dst = next_va_;
      next_va_ += region_rows * row_bytes;
    }
    auto [it, ok] = allocations_.emplace(a.id, std::move(a));
    (void)ok;
    return it->second;
  }

  void free_alloc(uint64_t id) {
    auto it = allocations_.find(id);
    if (it == allocations_.end())
      throw BoundsError("free of unknown allocation");
    for (uint32_t r : it->second.rows) used_[it->second.bank][r] = false;
    allocations_.erase(it);
  }

  const Allocation* find_allocation(uint64_t va) const {
    for (const auto& [id, a] : allocations_) {
      uint64_t span = a.rows_per_region() * dev_.geometry().row_bytes();
      if (va >= a.va_base && va < a.va_base + span) return &a;
      if (a.purpose == Purpose::OPERAND_PAIR && va >= a.va_dst &&
          va < a.va_dst + span)
        return &a;
    }
    return nullptr;
  }

  size_t live_allocations() const { return allocations_.size(); }

  // Resolve a row-aligned virtual address to its physical row.
  RowAddr resolve_row(uint64_t va) const {
    uint64_t row_bytes = dev_.geometry().row_bytes();
    if (va % row_bytes != 0)
      throw OperandError("virtual address not row-aligned");
    const Allocation* a = find_allocation(va);
    if (!a) throw OperandError("virtual address not allocated");
    uint64_t base = (a->purpose == Purpose::OPERAND_PAIR && va >= a->va_dst)
                        ? a->va_dst
                        : a->va_base;
    uint64_t idx = (va - base) / row_bytes;
    if (base == a->va_dst) idx += a->rows_per_region();
    return {a->bank, a->rows[idx]};
  }

  // Validated plan for one row copy: both rows allocated, same bank and
  // same inferred subarray. Throws before anything touches the device.
  std::pair<RowAddr, RowAddr> plan_copy(uint64_t src_va,
                                        uint64_t dst_va) const {
    RowAddr s = resolve_row(src_va);
    RowAddr d = resolve_row(dst_va);
    if (s.bank != d.bank)
      throw OperandError("copy operands in different banks");
    if (!map_.same_subarray(s.bank, s.row, d.row))
      throw OperandError("copy operands not in the same subarray");
    return {s, d};
  }

  // Plan for one row init: the destination plus its subarray's zero row.
  std::pair<RowAddr, RowAddr> plan_init(uint64_t dst_va) {
    RowAddr d = resolve_row(dst_va);
    RowAddr z = zero_row(d.bank, map_.subarray_of(d.bank, d.row));
    return {d, z};
  }

  RowAddr zero_row(uint32_t bank, uint32_t subarray) {
    reserve_zero_row(bank, subarray);
    return {bank, zero_rows_.at(key_of(bank, subarray))};
  }

  // ---- coherence cost --------------------------------------------------

  double coherence_cost_ns(uint64_t bytes, CoherenceMode mode) const {
    if (mode == CoherenceMode::NONE) return 0.0;
    return static_cast<double>(bytes) / cfg_.coherence.block_size_bytes *
           cfg_.coherence.flush_cost_per_block_ns;
  }

  // ---- discovery -------------------------------------------------------

  // Infer the per-bank partition by testing where the in-DRAM copy
  // succeeds. BINARY walks each bank with a fresh anchor per interval and
  // bisects for its end. RANDOM samples adjacent pairs; boundaries it
  // misses merge neighboring intervals (coarser map, still sound).
  DiscoveryResult discover_subarrays(MemController& ctrl,
                                     const DiscoverConfig& dc) {
    const auto& geo = dev_.geometry();
    DiscoveryResult res;
    probe_rng_ = SplitMix64(dc.seed);
    std::vector<std::vector<RowRange>> banks(geo.banks);

    for (uint32_t b = 0; b < geo.banks; ++b) {
      uint64_t before = probes_;
      if (dc.strategy == DiscoverConfig::Strategy::BINARY)
        banks[b] = discover_bank_binary(ctrl, b);
      else
        banks[b] = discover_bank_random(ctrl, b, dc.trials_per_boundary);
      res.probes_max_per_bank =
          std::max(res.probes_max_per_bank, probes_ - before);
    }
    res.probes_total = probes_;
    res.map = SubarrayMap(std::move(banks));
    res.map.validate(geo);
    set_map(res.map);
    return res;
  }

  uint64_t probes_used() const { return probes_; }

  // Non-constant pattern for one probe; exposed so tests can check the
  // methodology guard directly.
  static std::vector<uint64_t> make_probe_pattern(SplitMix64& rng,
                                                  uint32_t words,
                                                  uint64_t word_mask) {
    std::vector<uint64_t> p(words);
    for (auto& w : p) w = rng.next() & word_mask;
    bool constant = true;
    for (uint32_t i = 1; i < words; ++i) constant &= (p[i] == p[0]);
    if (constant && words > 1) p[0] = ~p[0] & word_mask;  // astronomically rare
    return p;
  }

 private:
  uint64_t key_of(uint32_t bank, uint32_t subarray) const {
    return (static_cast<uint64_t>(bank) << 32) | subarray;
  }

  void reserve_zero_row(uint32_t bank, uint32_t subarray) {
    uint64_t key = key_of(bank, subarray);
    if (zero_rows_.count(key)) return;
    const RowRange& iv = map_.intervals(bank)[subarray];
    // take the highest free row of the interval
    for (uint32_t r = iv.last;; --r) {
      if (!used_[bank][r]) {
        used_[bank][r] = true;
        std::vector<uint64_t> zeros(dev_.geometry().columns_per_row, 0);
        dev_.poke_row(bank, r, zeros);
        zero_rows_[key] = r;
        return;
      }
      if (r == iv.first) break;
    }
    throw AllocationError("no free row left for the zero row");
  }

  std::optional<std::tuple<uint32_t, uint32_t, uint32_t>> find_run(
      uint64_t need) const {
    const auto& geo = dev_.geometry();
    for (uint32_t b = 0; b < geo.banks; ++b) {
      const auto& ivs = map_.intervals(b);
      for (uint32_t s = 0; s < ivs.size(); ++s) {
        // keep one row spare for the zero row if not yet reserved
        uint32_t spare = zero_rows_.count(key_of(b, s)) ? 0 : 1;
        uint32_t len = ivs[s].last - ivs[s].first + 1;
        if (len < need + spare) continue;
        uint32_t run = 0;
        for (uint32_t r = ivs[s].first; r <= ivs[s].last - spare; ++r) {
          run = used_[b][r] ? 0 : run + 1;
          if (run == need)
            return std::make_tuple(b, s, r - static_cast<uint32_t>(need) + 1);
        }
      }
    }
    return std::nullopt;
  }

  // One copy probe: does (anchor -> target) behave like a same-subarray
  // copy? Pokes both rows, runs the violated sequence, verifies, restores.
  bool probe_same(MemController& ctrl, uint32_t bank, uint32_t r1,
                  uint32_t r2) {
    if (r1 == r2) return true;
    ++probes_;
    const auto& geo = dev_.geometry();
    auto saved1 = dev_.peek_row(bank, r1);
    auto saved2 = dev_.peek_row(bank, r2);
    auto pattern =
        make_probe_pattern(probe_rng_, geo.columns_per_row, geo.word_mask());
    std::vector<uint64_t> anti(pattern.size());
    for (size_t i = 0; i < anti.size(); ++i)
      anti[i] = ~pattern[i] & geo.word_mask();
    dev_.poke_row(bank, r1, pattern);
    dev_.poke_row(bank, r2, anti);
    ctrl.exec_rowclone_copy({bank, r1}, {bank, r2});
    bool same = dev_.peek_row(bank, r2) == pattern;
    dev_.poke_row(bank, r1, saved1);
    dev_.poke_row(bank, r2, saved2);
    return same;
  }

  std::vector<RowRange> discover_bank_binary(MemController& ctrl,
                                             uint32_t bank) {
    const uint32_t rows = dev_.geometry().rows_per_bank();
    std::vector<RowRange> out;
    uint32_t start = 0;
    while (start < rows) {
      uint32_t end;
      if (probe_same(ctrl, bank, start, rows - 1)) {
        end = rows - 1;
      } else {
        uint32_t lo = start, hi = rows - 1;  // same(lo) true, same(hi) false
        while (hi - lo > 1) {
          uint32_t mid = lo + (hi - lo) / 2;
          if (probe_same(ctrl, bank, start, mid)) lo = mid;
          else hi = mid;
        }
        end = lo;
      }
      out.push_back({start, end});
      start = end + 1;
    }
    return out;
  }

  std::vector<RowRange> discover_bank_random(MemController& ctrl,
                                             uint32_t bank,
                                             uint64_t trials) {
    const uint32_t rows = dev_.geometry().rows_per_bank();
    std::vector<bool> boundary(rows, false);  // boundary[r]: r starts a new subarray
    for (uint64_t t = 0; t < trials && rows > 1; ++t) {
      uint32_t r = static_cast<uint32_t>(probe_rng_.below(rows - 1));
      if (boundary[r + 1]) continue;  // already known
      if (!probe_same(ctrl, bank, r, r + 1)) boundary[r + 1] = true;
    }
    std::vector<RowRange> out;
    uint32_t start = 0;
    for (uint32_t r = 1; r < rows; ++r) {
      if (boundary[r]) {
        out.push_back({start, r - 1});
        start = r;
      }
    }
    out.push_back({start, rows - 1});
    return out;
  }

  DramDevice& dev_;
  AddressMap amap_;
  SubarrayMap map_;
  SupervisorConfig cfg_;
  std::vector<std::vector<bool>> used_;
  std::map<uint64_t, Allocation> allocations_;  // ordered for determinism
  std::unordered_map<uint64_t, uint32_t> zero_rows_;
  uint64_t next_id_ = 1;
  uint64_t next_va_ = 0;
  uint64_t probes_ = 0;
  SplitMix64 probe_rng_{0};
};

}  // namespace pidram
