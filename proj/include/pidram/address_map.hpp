#pragma once

#include <bit>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "pidram/errors.hpp"
#include "pidram/geometry.hpp"

namespace pidram {

struct PhysAddr {
  uint32_t bank = 0;
  uint32_t row = 0;
  uint32_t column = 0;

  bool operator==(const PhysAddr&) const = default;
};

struct AddressMapConfig {
  // Field order from most to least significant in the linear word index.
  // Bank on top keeps consecutive rows of one bank contiguous in the
  // linear space, so a multi-row buffer stays inside a single bank.
  std::string field_order = "bank,row,column";
  // Optional scramble: bank bit i flips by the parity of (row & mask[i]).
  std::vector<uint64_t> bank_xor_masks;
};

// Bijection between linear word indices and (bank, row, column) triples.
// Mixed-radix digits laid out per field_order, then an XOR swizzle of the
// bank digit keyed on the row digit. Word granularity: one index per
// device word, byte offsets are the caller's business.
class AddressMap {
 public:
  AddressMap(const DeviceGeometry& geo, AddressMapConfig cfg = {})
      : geo_(geo), cfg_(std::move(cfg)) {
    parse_order();
    if (!cfg_.bank_xor_masks.empty()) {
      if (!std::has_single_bit(geo_.banks))
        throw ConfigError("address map: xor scramble needs 2^n banks");
      size_t bank_bits = std::bit_width(geo_.banks) - 1;
      if (cfg_.bank_xor_masks.size() > bank_bits)
        throw ConfigError("address map: more xor masks than bank bits");
    }
  }

  uint64_t total_words() const {
    return geo_.total_rows() * geo_.columns_per_row;
  }

  PhysAddr decode(uint64_t word_index) const {
    if (word_index >= total_words())
      throw BoundsError("address out of range");
    uint64_t digits[3];
    for (int i = 2; i >= 0; --i) {
      uint64_t radix = radix_of(order_[i]);
      digits[i] = word_index % radix;
      word_index /= radix;
    }
    PhysAddr pa;
    for (int i = 0; i < 3; ++i) set_field(pa, order_[i], digits[i]);
    pa.bank ^= swizzle(pa.row);
    return pa;
  }

  uint64_t encode(const PhysAddr& pa) const {
    if (pa.bank >= geo_.banks || pa.row >= geo_.rows_per_bank() ||
        pa.column >= geo_.columns_per_row)
      throw BoundsError("address out of range");
    PhysAddr stored = pa;
    stored.bank ^= swizzle(pa.row);
    uint64_t idx = 0;
    for (int i = 0; i < 3; ++i)
      idx = idx * radix_of(order_[i]) + get_field(stored, order_[i]);
    return idx;
  }

  const AddressMapConfig& config() const { return cfg_; }

 private:
  enum class Field { BANK, ROW, COLUMN };

  void parse_order() {
    std::stringstream ss(cfg_.field_order);
    std::string tok;
    int n = 0;
    bool seen[3] = {false, false, false};
    while (std::getline(ss, tok, ',')) {
      if (n >= 3) throw ConfigError("address map: too many fields");
      Field f;
      if (tok == "bank") f = Field::BANK;
      else if (tok == "row") f = Field::ROW;
      else if (tok == "column" || tok == "col") f = Field::COLUMN;
      else throw ConfigError("address map: unknown field '" + tok + "'");
      if (seen[static_cast<int>(f)])
        throw ConfigError("address map: duplicate field '" + tok + "'");
      seen[static_cast<int>(f)] = true;
      order_[n++] = f;
    }
    if (n != 3) throw ConfigError("address map: need exactly 3 fields");
  }

  uint64_t radix_of(Field f) const {
    switch (f) {
      case Field::BANK:   return geo_.banks;
      case Field::ROW:    return geo_.rows_per_bank();
      case Field::COLUMN: return geo_.columns_per_row;
    }
    return 1;
  }

  static void set_field(PhysAddr& pa, Field f, uint64_t v) {
    switch (f) {
      case Field::BANK:   pa.bank = static_cast<uint32_t>(v); break;
      case Field::ROW:    pa.row = static_cast<uint32_t>(v); break;
      case Field::COLUMN: pa.column = static_cast<uint32_t>(v); break;
    }
  }

  static uint64_t get_field(const PhysAddr& pa, Field f) {
    switch (f) {
      case Field::BANK:   return pa.bank;
      case Field::ROW:    return pa.row;
      case Field::COLUMN: return pa.column;
    }
    return 0;
  }

  uint32_t swizzle(uint32_t row) const {
    uint32_t x = 0;
    for (size_t i = 0; i < cfg_.bank_xor_masks.size(); ++i) {
      uint64_t hits = row & cfg_.bank_xor_masks[i];
      x |= static_cast<uint32_t>(std::popcount(hits) & 1) << i;
    }
    return x;
  }

  DeviceGeometry geo_;
  AddressMapConfig cfg_;
  Field order_[3] = {Field::BANK, Field::ROW, Field::COLUMN};
};

}  // namespace pidram
