#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "pidram/config.hpp"
#include "pidram/controller.hpp"
#include "pidram/device.hpp"
#include "pidram/errors.hpp"

namespace pidram {

struct CharacterizeResult {
  CharacterizeMode mode = CharacterizeMode::BIAS_MAP;
  uint32_t bank = 0;
  uint32_t row = 0;
  std::vector<CellAddr> cells;
  std::vector<double> probs;  // per cell, parallel to cells
  double score = 0.0;         // sum of (p - 0.5)^2 over the chosen cells
  uint64_t reads_spent = 0;   // EMPIRICAL only
};

namespace detail {

struct Candidate {
  CellAddr cell;
  double p = 0.0;
};

// Best `want` cells by distance from a fair coin; ties and the final
// order resolved by (column, bit) so results never depend on sort
// internals.
inline std::vector<Candidate> best_cells(std::vector<Candidate> cand,
                                         uint32_t want) {
  std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
    double da = std::abs(a.p - 0.5), db = std::abs(b.p - 0.5);
    if (da != db) return da < db;
    if (a.cell.column != b.cell.column) return a.cell.column < b.cell.column;
    return a.cell.bit < b.cell.bit;
  });
  if (cand.size() > want) cand.resize(want);
  std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
    if (a.cell.column != b.cell.column) return a.cell.column < b.cell.column;
    return a.cell.bit < b.cell.bit;
  });
  return cand;
}

inline double score_of(const std::vector<Candidate>& cs) {
  double s = 0.0;
  for (const auto& c : cs) s += (c.p - 0.5) * (c.p - 0.5);
  return s;
}

}  // namespace detail

// Read the per-cell flip probabilities straight off the device model and
// pick the row of bank 0 whose best cells sit closest to 0.5. This is
// the datasheet view: no device traffic, exact probabilities.
inline CharacterizeResult characterize_bias_map(const DramDevice& dev,
                                                const CharacterizeConfig& cfg) {
  const auto& geo = dev.geometry();
  uint32_t rows = std::min(cfg.scan_rows, geo.rows_per_bank());
  CharacterizeResult best;
  bool found = false;
  for (uint32_t row = 0; row < rows; ++row) {
    std::vector<detail::Candidate> cand;
    for (const auto& [cell, p] : dev.bias_map().row_bias(0, row))
      cand.push_back({cell, p});
    if (cand.size() < cfg.cells) continue;
    auto top = detail::best_cells(std::move(cand), cfg.cells);
    double s = detail::score_of(top);
    if (!found || s < best.score) {
      found = true;
      best.row = row;
      best.score = s;
      best.cells.clear();
      best.probs.clear();
      for (const auto& c : top) {
        best.cells.push_back(c.cell);
        best.probs.push_back(c.p);
      }
    }
  }
  if (!found)
    throw StateError("characterization: no row with enough flipping cells");
  best.mode = CharacterizeMode::BIAS_MAP;
  best.bank = 0;
  return best;
}

// Estimate flip probabilities from actual charge-starved reads: a short
// screening pass per column finds cells that ever flip, then the
// survivors are re-read and the observed flip rate stands in for p.
// Costs real device traffic; meant for small scan_rows.
inline CharacterizeResult characterize_empirical(DramDevice& dev,
                                                 MemController& ctrl,
                                                 const CharacterizeConfig& cfg) {
  const auto& geo = dev.geometry();
  uint32_t rows = std::min(cfg.scan_rows, geo.rows_per_bank());
  uint32_t screen = std::min<uint32_t>(8, cfg.empirical_reads);
  CharacterizeResult best;
  bool found = false;

  for (uint32_t row = 0; row < rows; ++row) {
    bool resident = dev.row_resident(0, row);
    auto saved = dev.peek_row(0, row);
    std::vector<uint64_t> zeros(geo.columns_per_row, 0);
    dev.poke_row(0, row, zeros);

    std::vector<detail::Candidate> cand;
    for (uint32_t col = 0; col < geo.columns_per_row; ++col) {
      std::vector<uint64_t> flips(geo.word_bits, 0);
      uint32_t reads = 0;
      auto sample = [&] {
        uint64_t w = ctrl.weak_read_word(0, row, col);
        ++reads;
        ++best.reads_spent;
        for (uint32_t bit = 0; bit < geo.word_bits; ++bit)
          flips[bit] += (w >> bit) & 1;
      };
      for (uint32_t k = 0; k < screen; ++k) sample();
      bool any = std::any_of(flips.begin(), flips.end(),
                             [](uint64_t f) { return f > 0; });
      if (!any) continue;  // column never flipped, skip the refine reads
      for (uint32_t k = screen; k < cfg.empirical_reads; ++k) sample();
      for (uint32_t bit = 0; bit < geo.word_bits; ++bit) {
        if (flips[bit] == 0) continue;
        double p = static_cast<double>(flips[bit]) / reads;
        cand.push_back({CellAddr{0, row, col, bit}, p});
      }
    }

    if (resident) dev.poke_row(0, row, saved);
    if (cand.size() < cfg.cells) continue;
    auto top = detail::best_cells(std::move(cand), cfg.cells);
    double s = detail::score_of(top);
    if (!found || s < best.score) {
      found = true;
      best.row = row;
      best.score = s;
      best.cells.clear();
      best.probs.clear();
      for (const auto& c : top) {
        best.cells.push_back(c.cell);
        best.probs.push_back(c.p);
      }
    }
  }
  if (!found)
    throw StateError("characterization: no row with enough flipping cells");
  best.mode = CharacterizeMode::EMPIRICAL;
  best.bank = 0;
  return best;
}

inline CharacterizeResult characterize_rng_cells(DramDevice& dev,
                                                 MemController& ctrl,
                                                 const CharacterizeConfig& cfg,
                                                 const std::vector<CellAddr>&
                                                     explicit_cells) {
  switch (cfg.mode) {
    case CharacterizeMode::BIAS_MAP:
      return characterize_bias_map(dev, cfg);
    case CharacterizeMode::EMPIRICAL:
      return characterize_empirical(dev, ctrl, cfg);
    case CharacterizeMode::EXPLICIT: {
      if (explicit_cells.empty())
        throw ConfigError("explicit characterization needs rng_cells");
      CharacterizeResult r;
      r.mode = CharacterizeMode::EXPLICIT;
      r.bank = explicit_cells[0].bank;
      r.row = explicit_cells[0].row;
      r.cells = explicit_cells;
      for (const auto& c : explicit_cells) {
        double p = dev.bias_map().flip_probability(c);
        r.probs.push_back(p);
        r.score += (p - 0.5) * (p - 0.5);
      }
      return r;
    }
  }
  throw ConfigError("unknown characterization mode");
}

}  // namespace pidram
