#pragma once

#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include "pidram/stack.hpp"
#include "pidram/stats.hpp"

namespace pidram {

namespace detail {

inline std::string fmt(double v, int prec = 3) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(prec) << v;
  return os.str();
}

inline void fill_rows_random(DramDevice& dev, uint32_t bank,
                             const std::vector<uint32_t>& rows, size_t first,
                             size_t count, uint64_t seed) {
  const auto& geo = dev.geometry();
  Prf prf(seed);
  for (size_t i = 0; i < count; ++i) {
    uint32_t row = rows[first + i];
    std::vector<uint64_t> words(geo.columns_per_row);
    uint64_t key = (static_cast<uint64_t>(bank) << 32) | row;
    for (uint32_t c = 0; c < geo.columns_per_row; ++c)
      words[c] = prf.value(prf_domain::kWorkload, key, c, 0) & geo.word_mask();
    dev.poke_row(bank, row, words);
  }
}

}  // namespace detail

struct BenchSizeResult {
  uint64_t requested_bytes = 0;
  uint64_t bytes = 0;
  bool rounded = false;
  uint32_t rows = 0;
  double pim_ns = 0.0;
  double flush_ns = 0.0;
  double total_ns = 0.0;
  double cpu_ns = 0.0;
  double speedup = 0.0;
  bool verified = false;
};

struct CopyBenchReport {
  CoherenceMode mode = CoherenceMode::NONE;
  bool is_init = false;
  std::vector<BenchSizeResult> sizes;

  ordered_json to_json() const {
    ordered_json arr = ordered_json::array();
    for (const auto& r : sizes)
      arr.push_back({{"requested_bytes", r.requested_bytes},
                     {"bytes", r.bytes},
                     {"rounded", r.rounded},
                     {"rows", r.rows},
                     {"pim_ns", r.pim_ns},
                     {"flush_ns", r.flush_ns},
                     {"total_ns", r.total_ns},
                     {"cpu_ns", r.cpu_ns},
                     {"speedup", r.speedup},
                     {"verified", r.verified}});
    return ordered_json{
        {"mode", mode == CoherenceMode::NONE ? "no-flush" : "flush"},
        {"sizes", arr}};
  }

  std::string to_text() const {
    std::ostringstream os;
    os << (is_init ? "init-bench" : "copy-bench") << " mode="
       << (mode == CoherenceMode::NONE ? "no-flush" : "flush") << '\n';
    for (const auto& r : sizes) {
      os << "  " << std::setw(8) << r.bytes << " B  pim "
         << detail::fmt(r.total_ns) << " ns  cpu " << detail::fmt(r.cpu_ns)
         << " ns  speedup " << detail::fmt(r.speedup, 2)
         << (r.verified ? "" : "  VERIFY-FAILED")
         << (r.rounded ? "  (rounded up)" : "") << '\n';
    }
    return os.str();
  }
};

inline CopyBenchReport run_copy_bench(SimStack& st,
                                      const std::vector<uint64_t>& sizes,
                                      CoherenceMode mode) {
  CopyBenchReport rep;
  rep.mode = mode;
  auto& sup = st.supervisor();
  auto& dev = st.device();
  double clk = st.config().timing.clock_period_ns;
  uint64_t row_bytes = st.config().geometry.row_bytes();

  for (uint64_t req : sizes) {
    BenchSizeResult r;
    r.requested_bytes = req;
    r.rounded = req % row_bytes != 0;
    r.bytes = (req + row_bytes - 1) / row_bytes * row_bytes;
    r.rows = static_cast<uint32_t>(r.bytes / row_bytes);

    Allocation a = sup.alloc_align(r.bytes, Purpose::OPERAND_PAIR);
    detail::fill_rows_random(dev, a.bank, a.rows, 0, r.rows,
                             st.config().seed ^ req);

    uint64_t t0 = st.bus().now();
    for (uint32_t i = 0; i < r.rows; ++i)
      if (st.lib().pim_copy(a.va_base + i * row_bytes,
                            a.va_dst + i * row_bytes,
                            BlockingMode::FINISH) != PollStatus::SET)
        throw StateError("copy-bench: operation never finished");
    r.pim_ns = (st.bus().now() - t0) * clk;
    r.flush_ns = sup.coherence_cost_ns(r.bytes, mode);
    r.total_ns = r.pim_ns + r.flush_ns;
    r.cpu_ns = st.calibration().cpu.copy_ns(r.bytes);
    r.speedup = r.cpu_ns / r.total_ns;

    r.verified = true;
    for (uint32_t i = 0; i < r.rows; ++i)
      r.verified &= dev.peek_row(a.bank, a.rows[i]) ==
                    dev.peek_row(a.bank, a.rows[r.rows + i]);

    sup.free_alloc(a.id);
    rep.sizes.push_back(r);
  }
  return rep;
}

inline CopyBenchReport run_init_bench(SimStack& st,
                                      const std::vector<uint64_t>& sizes,
                                      CoherenceMode mode) {
  CopyBenchReport rep;
  rep.mode = mode;
  rep.is_init = true;
  auto& sup = st.supervisor();
  auto& dev = st.device();
  double clk = st.config().timing.clock_period_ns;
  uint64_t row_bytes = st.config().geometry.row_bytes();

  for (uint64_t req : sizes) {
    BenchSizeResult r;
    r.requested_bytes = req;
    r.rounded = req % row_bytes != 0;
    r.bytes = (req + row_bytes - 1) / row_bytes * row_bytes;
    r.rows = static_cast<uint32_t>(r.bytes / row_bytes);

    Allocation a = sup.alloc_align(r.bytes, Purpose::SINGLE);
    detail::fill_rows_random(dev, a.bank, a.rows, 0, r.rows,
                             st.config().seed ^ req ^ 0x1717);

    uint64_t t0 = st.bus().now();
    for (uint32_t i = 0; i < r.rows; ++i)
      if (st.lib().pim_init(a.va_base + i * row_bytes,
                            BlockingMode::FINISH) != PollStatus::SET)
        throw StateError("init-bench: operation never finished");
    r.pim_ns = (st.bus().now() - t0) * clk;
    r.flush_ns = sup.coherence_cost_ns(r.bytes, mode);
    r.total_ns = r.pim_ns + r.flush_ns;
    r.cpu_ns = st.calibration().cpu.init_ns(r.bytes);
    r.speedup = r.cpu_ns / r.total_ns;

    r.verified = true;
    for (uint32_t i = 0; i < r.rows; ++i)
      for (uint64_t w : dev.peek_row(a.bank, a.rows[i]))
        r.verified &= (w == 0);

    sup.free_alloc(a.id);
    rep.sizes.push_back(r);
  }
  return rep;
}

struct TrngBenchReport {
  double latency_ns = 0.0;       // first cold 4-bit request, end to end
  bool cold = true;
  uint64_t bits = 0;
  double elapsed_ns = 0.0;
  double throughput_mbps = 0.0;  // 1 Mb/s = 1e6 bits per second

  ordered_json to_json() const {
    return ordered_json{{"latency_ns", latency_ns},
                        {"cold", cold},
                        {"bits", bits},
                        {"elapsed_ns", elapsed_ns},
                        {"throughput_mbps", throughput_mbps}};
  }

  std::string to_text() const {
    std::ostringstream os;
    os << "trng-bench\n"
       << "  4-bit latency " << detail::fmt(latency_ns) << " ns"
       << (cold ? "" : " (warm stack)") << '\n'
       << "  sustained " << detail::fmt(throughput_mbps, 4) << " Mb/s over "
       << bits << " bits (" << detail::fmt(elapsed_ns, 1) << " ns)\n";
    return os.str();
  }
};

inline TrngBenchReport run_trng_bench(SimStack& st, uint64_t total_bits) {
  TrngBenchReport rep;
  double clk = st.config().timing.clock_period_ns;
  st.bus().set_logging(false);

  rep.cold = st.poc().stats().rands == 0;
  uint64_t t0 = st.bus().now();
  st.lib().rand_dram(4);
  rep.latency_ns = (st.bus().now() - t0) * clk;

  rep.bits = total_bits;
  t0 = st.bus().now();
  st.lib().rand_dram(total_bits);
  rep.elapsed_ns = (st.bus().now() - t0) * clk;
  rep.throughput_mbps =
      rep.elapsed_ns > 0 ? total_bits / rep.elapsed_ns * 1000.0 : 0.0;
  return rep;
}

struct RandomnessReport {
  uint64_t bits = 0;
  MonobitResult mono;
  ChiSquare4Result chi;
  double alpha = 0.01;
  bool monobit_ok = false;
  bool chi_ok = false;

  ordered_json to_json() const {
    return ordered_json{
        {"bits", bits},
        {"monobit",
         {{"ones", mono.ones},
          {"fraction", mono.fraction},
          {"pass", monobit_ok}}},
        {"chi_square_4bit",
         {{"statistic", chi.statistic},
          {"dof", chi.dof},
          {"p_value", chi.p_value},
          {"alpha", alpha},
          {"pass", chi_ok}}}};
  }

  std::string to_text() const {
    std::ostringstream os;
    os << "randomness over " << bits << " bits\n"
       << "  monobit fraction " << detail::fmt(mono.fraction, 6) << "  "
       << (monobit_ok ? "pass" : "FAIL") << '\n'
       << "  chi-square(4-bit) " << detail::fmt(chi.statistic, 3)
       << "  p=" << detail::fmt(chi.p_value, 5) << "  "
       << (chi_ok ? "pass" : "FAIL") << '\n';
    return os.str();
  }
};

inline RandomnessReport run_randomness_tests(SimStack& st, uint64_t bits) {
  if (bits < 100000)
    throw ConfigError("randomness tests need at least 100000 bits");
  st.bus().set_logging(false);
  RandomnessReport rep;
  rep.bits = bits;
  auto sample = st.lib().rand_dram(bits);
  rep.mono = monobit(sample);
  rep.chi = chi_square_4bit(sample);
  rep.monobit_ok = rep.mono.fraction >= 0.49 && rep.mono.fraction <= 0.51;
  rep.chi_ok = rep.chi.p_value >= rep.alpha;
  return rep;
}

struct DiscoveryReport {
  uint64_t probes_total = 0;
  uint64_t probes_max_per_bank = 0;
  uint64_t budget_per_bank = 0;
  bool within_budget = false;
  bool matches_geometry = false;
  std::string map_text;

  ordered_json to_json() const {
    return ordered_json{{"probes_total", probes_total},
                        {"probes_max_per_bank", probes_max_per_bank},
                        {"budget_per_bank", budget_per_bank},
                        {"within_budget", within_budget},
                        {"matches_geometry", matches_geometry},
                        {"map", map_text}};
  }

  std::string to_text() const {
    std::ostringstream os;
    os << "discovery: " << probes_total << " probes (max "
       << probes_max_per_bank << " per bank, budget " << budget_per_bank
       << ")" << (within_budget ? "" : "  OVER-BUDGET")
       << (matches_geometry ? ", exact" : ", coarse") << '\n';
    return os.str();
  }
};

inline DiscoveryReport run_discovery(SimStack& st, const DiscoverConfig& dc) {
  DiscoveryReport rep;
  auto res = st.supervisor().discover_subarrays(st.controller(), dc);
  st.bus().sync_to(st.controller().now());
  const auto& geo = st.config().geometry;
  uint32_t logr = 0;
  while ((1u << logr) < geo.rows_per_bank()) ++logr;
  rep.probes_total = res.probes_total;
  rep.probes_max_per_bank = res.probes_max_per_bank;
  rep.budget_per_bank = 2ull * geo.subarrays_per_bank * logr;
  rep.within_budget = rep.probes_max_per_bank <= rep.budget_per_bank;
  rep.matches_geometry = res.map == SubarrayMap::from_geometry(geo);
  rep.map_text = res.map.serialize();
  return rep;
}

// Small deterministic mix of everything, with the command trace on:
// conventional traffic, one copy, one init, a few random bits.
inline std::string run_trace_dump(SimStack& st) {
  st.device().trace().set_enabled(true);
  auto& sup = st.supervisor();
  uint64_t row_bytes = st.config().geometry.row_bytes();
  uint64_t wb = st.config().geometry.word_bytes();

  Allocation a = sup.alloc_align(row_bytes, Purpose::OPERAND_PAIR);
  uint64_t pa = sup.dram_to_phys({a.bank, a.rows[0], 0});
  for (uint32_t i = 0; i < 4; ++i)
    st.controller().schedule_access(
        {MemRequest::Kind::WRITE, pa + i * wb, 0xC0FFEE00 + i});
  for (uint32_t i = 0; i < 4; ++i)
    st.controller().schedule_access({MemRequest::Kind::READ, pa + i * wb, 0});
  st.bus().sync_to(st.controller().now());

  st.lib().pim_copy(a.va_base, a.va_dst, BlockingMode::FINISH);
  st.lib().pim_init(a.va_dst, BlockingMode::FINISH);
  st.lib().rand_dram(8);
  sup.free_alloc(a.id);

  std::ostringstream os;
  st.device().trace().dump(os);
  return os.str();
}

}  // namespace pidram
