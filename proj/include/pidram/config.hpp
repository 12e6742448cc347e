#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "pidram/bias.hpp"
#include "pidram/controller.hpp"
#include "pidram/cost_model.hpp"
#include "pidram/device.hpp"
#include "pidram/errors.hpp"
#include "pidram/geometry.hpp"
#include "pidram/pimolib.hpp"
#include "pidram/supervisor.hpp"

namespace pidram {

using ordered_json = nlohmann::ordered_json;

enum class CharacterizeMode : uint8_t { BIAS_MAP, EMPIRICAL, EXPLICIT };
enum class MapSource : uint8_t { GROUND_TRUTH, DISCOVER, FILE };

struct CharacterizeConfig {
  CharacterizeMode mode = CharacterizeMode::BIAS_MAP;
  uint32_t scan_rows = 256;       // candidate rows of bank 0
  uint32_t cells = 4;             // harvest cells to select
  uint32_t empirical_reads = 64;  // weak reads per candidate row

  void validate() const {
    if (scan_rows < 1) throw ConfigError("characterize: scan_rows < 1");
    if (cells < 1 || cells > 4)
      throw ConfigError("characterize: cells must be 1..4");
    if (empirical_reads < 1)
      throw ConfigError("characterize: empirical_reads < 1");
  }
};

struct SimConfig {
  uint64_t seed = 1;
  DeviceGeometry geometry;
  TimingParams timing;
  EffectParams effects;
  BiasConfig bias;
  AddressMapConfig address_map;
  ControllerConfig controller;
  CharacterizeConfig characterize;
  CoherenceModel coherence{0.0, 64, 1.0};  // flush cost 0 = calibrate
  SpeedupTargets targets;
  double mmio_cost_ns = 0.0;      // 0 = calibrate to the latency target
  double latency_target_ns = 220.0;
  PimLibConfig pimlib;
  MapSource map_source = MapSource::GROUND_TRUTH;
  std::string map_file;
  DiscoverConfig discover;

  void validate() const {
    geometry.validate();
    timing.validate();
    effects.validate();
    bias.validate();
    characterize.validate();
    coherence.validate();
    targets.validate();
    if (mmio_cost_ns < 0) throw ConfigError("mmio_cost_ns < 0");
    if (latency_target_ns <= 0) throw ConfigError("latency_target_ns <= 0");
    if (map_source == MapSource::FILE && map_file.empty())
      throw ConfigError("map_source 'file' needs map_file");
  }

  static SimConfig from_json(const ordered_json& j);
  ordered_json to_json() const;

  static SimConfig load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    ordered_json j;
    try {
      in >> j;
    } catch (const std::exception& e) {
      throw ConfigError("bad config json: " + std::string(e.what()));
    }
    return from_json(j);
  }

  void save(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write config file: " + path);
    out << to_json().dump(2) << '\n';
  }
};

namespace detail {

inline std::string mode_str(CharacterizeMode m) {
  switch (m) {
    case CharacterizeMode::BIAS_MAP:  return "bias_map";
    case CharacterizeMode::EMPIRICAL: return "empirical";
    case CharacterizeMode::EXPLICIT:  return "explicit";
  }
  return "?";
}

inline CharacterizeMode mode_from(const std::string& s) {
  if (s == "bias_map") return CharacterizeMode::BIAS_MAP;
  if (s == "empirical") return CharacterizeMode::EMPIRICAL;
  if (s == "explicit") return CharacterizeMode::EXPLICIT;
  throw ConfigError("unknown characterization mode: " + s);
}

inline std::string source_str(MapSource m) {
  switch (m) {
    case MapSource::GROUND_TRUTH: return "ground_truth";
    case MapSource::DISCOVER:     return "discover";
    case MapSource::FILE:         return "file";
  }
  return "?";
}

inline MapSource source_from(const std::string& s) {
  if (s == "ground_truth") return MapSource::GROUND_TRUTH;
  if (s == "discover") return MapSource::DISCOVER;
  if (s == "file") return MapSource::FILE;
  throw ConfigError("unknown map source: " + s);
}

inline std::string policy_str(RngFillPolicy p) {
  return p == RngFillPolicy::ON_DEMAND ? "on_demand" : "background";
}

inline RngFillPolicy policy_from(const std::string& s) {
  if (s == "on_demand") return RngFillPolicy::ON_DEMAND;
  if (s == "background") return RngFillPolicy::BACKGROUND;
  throw ConfigError("unknown rng fill policy: " + s);
}

inline std::string strategy_str(DiscoverConfig::Strategy s) {
  return s == DiscoverConfig::Strategy::BINARY ? "binary" : "random";
}

inline DiscoverConfig::Strategy strategy_from(const std::string& s) {
  if (s == "binary") return DiscoverConfig::Strategy::BINARY;
  if (s == "random") return DiscoverConfig::Strategy::RANDOM;
  throw ConfigError("unknown discover strategy: " + s);
}

}  // namespace detail

inline SimConfig SimConfig::from_json(const ordered_json& j) {
  SimConfig c;
  c.seed = j.value("seed", c.seed);

  if (j.contains("geometry")) {
    const auto& g = j.at("geometry");
    c.geometry.banks = g.value("banks", c.geometry.banks);
    c.geometry.subarrays_per_bank =
        g.value("subarrays_per_bank", c.geometry.subarrays_per_bank);
    c.geometry.rows_per_subarray =
        g.value("rows_per_subarray", c.geometry.rows_per_subarray);
    c.geometry.columns_per_row =
        g.value("columns_per_row", c.geometry.columns_per_row);
    c.geometry.word_bits = g.value("word_bits", c.geometry.word_bits);
  }
  if (j.contains("timing")) {
    const auto& t = j.at("timing");
    c.timing.tRCD = t.value("tRCD", c.timing.tRCD);
    c.timing.tRAS = t.value("tRAS", c.timing.tRAS);
    c.timing.tRP = t.value("tRP", c.timing.tRP);
    c.timing.tWR = t.value("tWR", c.timing.tWR);
    c.timing.tCL = t.value("tCL", c.timing.tCL);
    c.timing.tRC = t.value("tRC", c.timing.tRC);
    c.timing.clock_period_ns =
        t.value("clock_period_ns", c.timing.clock_period_ns);
  }
  if (j.contains("effects")) {
    const auto& e = j.at("effects");
    c.effects.act_pre_max_gap =
        e.value("act_pre_max_gap", c.effects.act_pre_max_gap);
    c.effects.pre_act_max_gap =
        e.value("pre_act_max_gap", c.effects.pre_act_max_gap);
  }
  if (j.contains("bias")) {
    const auto& b = j.at("bias");
    c.bias.f_rng = b.value("f_rng", c.bias.f_rng);
    c.bias.f_always = b.value("f_always", c.bias.f_always);
    c.bias.temperature_scale =
        b.value("temperature_scale", c.bias.temperature_scale);
    for (const auto& o : b.value("overrides", ordered_json::array())) {
      // "bit" here is the row-global bit position
      uint32_t bit = o.at("bit").get<uint32_t>();
      CellAddr cell{o.at("bank").get<uint32_t>(),
                    o.at("row").get<uint32_t>(), bit / c.geometry.word_bits,
                    bit % c.geometry.word_bits};
      c.bias.overrides.push_back({cell, o.at("p").get<double>()});
    }
  }
  if (j.contains("address_map")) {
    const auto& a = j.at("address_map");
    c.address_map.field_order =
        a.value("field_order", c.address_map.field_order);
    c.address_map.bank_xor_masks = a.value(
        "bank_xor_masks", std::vector<uint64_t>{});
  }
  if (j.contains("controller")) {
    const auto& k = j.at("controller");
    c.controller.drange_period_ns =
        k.value("drange_period_ns", c.controller.drange_period_ns);
    c.controller.rng_buffer_bits =
        k.value("rng_buffer_bits", c.controller.rng_buffer_bits);
    c.controller.rng_fill_policy = detail::policy_from(
        k.value("rng_fill_policy",
                detail::policy_str(c.controller.rng_fill_policy)));
  }
  for (const auto& o : j.value("rng_cells", ordered_json::array()))
    c.controller.rng_cells.push_back(
        {o.at("bank").get<uint32_t>(), o.at("row").get<uint32_t>(),
         o.at("column").get<uint32_t>(), o.at("bit").get<uint32_t>()});
  if (j.contains("characterization")) {
    const auto& h = j.at("characterization");
    c.characterize.mode = detail::mode_from(
        h.value("mode", detail::mode_str(c.characterize.mode)));
    c.characterize.scan_rows =
        h.value("scan_rows", c.characterize.scan_rows);
    c.characterize.cells = h.value("cells", c.characterize.cells);
    c.characterize.empirical_reads =
        h.value("empirical_reads", c.characterize.empirical_reads);
  }
  if (j.contains("coherence")) {
    const auto& h = j.at("coherence");
    c.coherence.flush_cost_per_block_ns = h.value(
        "flush_cost_per_block_ns", c.coherence.flush_cost_per_block_ns);
    c.coherence.block_size_bytes =
        h.value("block_size_bytes", c.coherence.block_size_bytes);
    c.coherence.dirty_fraction =
        h.value("dirty_fraction", c.coherence.dirty_fraction);
  }
  if (j.contains("targets")) {
    const auto& t = j.at("targets");
    c.targets.copy_no_flush =
        t.value("copy_no_flush", c.targets.copy_no_flush);
    c.targets.copy_flush = t.value("copy_flush", c.targets.copy_flush);
    c.targets.init_no_flush =
        t.value("init_no_flush", c.targets.init_no_flush);
    c.targets.init_flush = t.value("init_flush", c.targets.init_flush);
  }
  c.mmio_cost_ns = j.value("mmio_cost_ns", c.mmio_cost_ns);
  c.latency_target_ns = j.value("latency_target_ns", c.latency_target_ns);
  if (j.contains("pimlib"))
    c.pimlib.poll_timeout_cycles = j.at("pimlib").value(
        "poll_timeout_cycles", c.pimlib.poll_timeout_cycles);
  c.map_source = detail::source_from(
      j.value("map_source", detail::source_str(c.map_source)));
  c.map_file = j.value("map_file", c.map_file);
  if (j.contains("discover")) {
    const auto& d = j.at("discover");
    c.discover.strategy = detail::strategy_from(
        d.value("strategy", detail::strategy_str(c.discover.strategy)));
    c.discover.trials_per_boundary =
        d.value("trials_per_boundary", c.discover.trials_per_boundary);
    c.discover.seed = d.value("seed", c.discover.seed);
  }
  c.validate();
  return c;
}

inline ordered_json SimConfig::to_json() const {
  ordered_json j;
  j["seed"] = seed;
  j["geometry"] = {{"banks", geometry.banks},
                   {"subarrays_per_bank", geometry.subarrays_per_bank},
                   {"rows_per_subarray", geometry.rows_per_subarray},
                   {"columns_per_row", geometry.columns_per_row},
                   {"word_bits", geometry.word_bits}};
  j["timing"] = {{"tRCD", timing.tRCD}, {"tRAS", timing.tRAS},
                 {"tRP", timing.tRP},   {"tWR", timing.tWR},
                 {"tCL", timing.tCL},   {"tRC", timing.tRC},
                 {"clock_period_ns", timing.clock_period_ns}};
  j["effects"] = {{"act_pre_max_gap", effects.act_pre_max_gap},
                  {"pre_act_max_gap", effects.pre_act_max_gap}};
  ordered_json overrides = ordered_json::array();
  for (const auto& o : bias.overrides)
    overrides.push_back(
        {{"bank", o.cell.bank},
         {"row", o.cell.row},
         {"bit", o.cell.column * geometry.word_bits + o.cell.bit},
         {"p", o.p}});
  j["bias"] = {{"f_rng", bias.f_rng},
               {"f_always", bias.f_always},
               {"temperature_scale", bias.temperature_scale},
               {"overrides", overrides}};
  j["address_map"] = {{"field_order", address_map.field_order},
                      {"bank_xor_masks", address_map.bank_xor_masks}};
  j["controller"] = {
      {"drange_period_ns", controller.drange_period_ns},
      {"rng_buffer_bits", controller.rng_buffer_bits},
      {"rng_fill_policy", detail::policy_str(controller.rng_fill_policy)}};
  ordered_json cells = ordered_json::array();
  for (const auto& c : controller.rng_cells)
    cells.push_back({{"bank", c.bank},
                     {"row", c.row},
                     {"column", c.column},
                     {"bit", c.bit}});
  j["rng_cells"] = cells;
  j["characterization"] = {
      {"mode", detail::mode_str(characterize.mode)},
      {"scan_rows", characterize.scan_rows},
      {"cells", characterize.cells},
      {"empirical_reads", characterize.empirical_reads}};
  j["coherence"] = {
      {"flush_cost_per_block_ns", coherence.flush_cost_per_block_ns},
      {"block_size_bytes", coherence.block_size_bytes},
      {"dirty_fraction", coherence.dirty_fraction}};
  j["targets"] = {{"copy_no_flush", targets.copy_no_flush},
                  {"copy_flush", targets.copy_flush},
                  {"init_no_flush", targets.init_no_flush},
                  {"init_flush", targets.init_flush}};
  j["mmio_cost_ns"] = mmio_cost_ns;
  j["latency_target_ns"] = latency_target_ns;
  j["pimlib"] = {{"poll_timeout_cycles", pimlib.poll_timeout_cycles}};
  j["map_source"] = detail::source_str(map_source);
  j["map_file"] = map_file;
  j["discover"] = {
      {"strategy", detail::strategy_str(discover.strategy)},
      {"trials_per_boundary", discover.trials_per_boundary},
      {"seed", discover.seed}};
  return j;
}

}  // namespace pidram
