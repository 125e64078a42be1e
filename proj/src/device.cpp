#include "mcam/device.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mcam/errors.hpp"
#include "mcam/noise.hpp"

namespace mcam {

void McamGeometry::validate() const {
  if (cells_per_string == 0) throw ConfigError("cells_per_string must be >= 1");
  if (strings_per_block == 0) throw ConfigError("strings_per_block must be >= 1");
}

void CurrentModelParams::validate() const {
  if (!(i0 > 0.0) || !std::isfinite(i0)) throw ConfigError("i0 must be > 0");
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw ConfigError("alpha must be > 0");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ConfigError("noise_sigma must be >= 0");
  }
  const auto& g = bottleneck_gain;
  if (g[0] != 1.0 || !(g[0] > g[1] && g[1] > g[2] && g[2] > g[3] && g[3] > 0.0)) {
    throw ConfigError("bottleneck gains must satisfy 1 = g0 > g1 > g2 > g3 > 0");
  }
}

double adjacent_overlap(const CurrentModelParams& params) {
  if (params.noise_sigma == 0.0) return 0.0;
  // 2 * Phi(-x) = erfc(x / sqrt 2)
  return std::erfc(params.alpha / (2.0 * params.noise_sigma) / std::sqrt(2.0));
}

StringMismatch string_mismatch(std::span<const CodeWord> stored, std::span<const CodeWord> applied) {
  if (stored.size() != applied.size()) {
    throw std::invalid_argument("string_mismatch: " + std::to_string(stored.size()) +
                                " stored cells vs " + std::to_string(applied.size()) +
                                " applied words");
  }
  StringMismatch m;
  for (std::size_t i = 0; i < stored.size(); ++i) {
    const int level = cell_mismatch(applied[i], stored[i]);
    m.total += level;
    m.max = std::max(m.max, level);
  }
  return m;
}

double current_from_mismatch(StringMismatch m, const CurrentModelParams& params,
                             std::optional<NoiseKey> noise) {
  double current = params.i0 * params.bottleneck_gain[static_cast<std::size_t>(m.max)] *
                   std::exp(-params.alpha * m.total);
  if (noise && params.noise_sigma > 0.0) {
    const double z = noise::standard_normal(params.seed, noise->string, noise->iteration, noise->draw);
    current *= std::exp(params.noise_sigma * z);
  }
  return current;
}

double string_current(std::span<const CodeWord> stored, std::span<const CodeWord> applied,
                      const CurrentModelParams& params, std::optional<NoiseKey> noise) {
  return current_from_mismatch(string_mismatch(stored, applied), params, noise);
}

void SenseConfig::validate() const {
  if (mode == SenseMode::FixedThreshold && !std::isfinite(threshold)) {
    throw ConfigError("sense threshold must be finite");
  }
  if (mode == SenseMode::Percentile && !(percentile > 0.0 && percentile < 1.0)) {
    throw ConfigError("sense percentile must be in (0, 1)");
  }
}

std::string_view to_string(SenseMode mode) noexcept {
  switch (mode) {
    case SenseMode::IdealTopCurrent: return "ideal";
    case SenseMode::FixedThreshold: return "threshold";
    case SenseMode::Percentile: return "percentile";
  }
  return "?";
}

SenseMode parse_sense_mode(std::string_view name) {
  if (name == "ideal" || name == "top") return SenseMode::IdealTopCurrent;
  if (name == "threshold" || name == "fixed") return SenseMode::FixedThreshold;
  if (name == "percentile") return SenseMode::Percentile;
  throw ConfigError("unknown sense mode '" + std::string(name) + "'");
}

std::vector<bool> sense(std::span<const double> currents, const SenseConfig& cfg) {
  if (currents.empty()) throw std::invalid_argument("sense: no strings to sense");
  std::vector<bool> votes(currents.size(), false);
  switch (cfg.mode) {
    case SenseMode::IdealTopCurrent: {
      const double top = *std::max_element(currents.begin(), currents.end());
      for (std::size_t i = 0; i < currents.size(); ++i) votes[i] = currents[i] == top;
      break;
    }
    case SenseMode::FixedThreshold:
      for (std::size_t i = 0; i < currents.size(); ++i) votes[i] = currents[i] > cfg.threshold;
      break;
    case SenseMode::Percentile: {
      cfg.validate();
      const auto n = currents.size();
      const auto want = std::clamp<std::size_t>(
          static_cast<std::size_t>(std::llround(cfg.percentile * static_cast<double>(n))), 1, n);
      std::vector<std::size_t> order(n);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) { return currents[a] > currents[b]; });
      for (std::size_t i = 0; i < want; ++i) votes[order[i]] = true;
      break;
    }
  }
  return votes;
}

std::size_t strings_per_support(std::size_t dim, std::uint32_t cl, const McamGeometry& geom,
                                LayoutOrder order) {
  const std::size_t c = geom.cells_per_string;
  switch (order) {
    case LayoutOrder::DimensionMajor: return (dim * cl + c - 1) / c;
    case LayoutOrder::WordColumns: return (dim + c - 1) / c * cl;
  }
  return 0;
}

std::vector<CellRef> slot_cells(std::size_t dim, std::uint32_t cl, const McamGeometry& geom,
                                LayoutOrder order, std::size_t slot) {
  const std::size_t c = geom.cells_per_string;
  std::vector<CellRef> cells;
  if (order == LayoutOrder::DimensionMajor) {
    const std::size_t first = slot * c;
    const std::size_t last = std::min(first + c, dim * cl);
    for (std::size_t w = first; w < last; ++w) {
      cells.push_back({w / cl, static_cast<std::uint32_t>(w % cl)});
    }
  } else {
    const std::size_t group = slot / cl;
    const auto word = static_cast<std::uint32_t>(slot % cl);
    const std::size_t last = std::min((group + 1) * c, dim);
    for (std::size_t i = group * c; i < last; ++i) cells.push_back({i, word});
  }
  return cells;
}

SearchPlanLayout layout_supports(std::span<const EncodedVector> supports, const McamGeometry& geom,
                                 LayoutOrder order) {
  geom.validate();
  if (supports.empty()) throw std::invalid_argument("layout_supports: empty support set");
  const auto& first = supports.front();
  for (const auto& s : supports) {
    if (s.scheme != first.scheme || s.cl != first.cl || s.dim() != first.dim()) {
      throw std::invalid_argument("layout_supports: supports differ in scheme, cl or dimension");
    }
  }
  SearchPlanLayout layout;
  layout.order = order;
  layout.scheme = first.scheme;
  layout.cl = first.cl;
  layout.dim = first.dim();
  layout.support_count = supports.size();
  layout.strings_per_support = strings_per_support(layout.dim, layout.cl, geom, order);

  const std::size_t required = layout.support_count * layout.strings_per_support;
  if (required > geom.strings_per_block) throw CapacityError(required, geom.strings_per_block);

  std::vector<std::vector<CellRef>> slots;
  slots.reserve(layout.strings_per_support);
  for (std::size_t j = 0; j < layout.strings_per_support; ++j) {
    slots.push_back(slot_cells(layout.dim, layout.cl, geom, order, j));
  }
  layout.strings.reserve(required);
  for (std::size_t s = 0; s < supports.size(); ++s) {
    for (std::size_t j = 0; j < slots.size(); ++j) {
      StringState st;
      st.support = static_cast<std::uint32_t>(s);
      st.sub_vector = static_cast<std::uint32_t>(j);
      st.cells.reserve(slots[j].size());
      for (const auto& ref : slots[j]) {
        st.cells.push_back(supports[s].words[ref.dimension * layout.cl + ref.word]);
      }
      layout.strings.push_back(std::move(st));
    }
  }
  return layout;
}

const std::set<std::string, std::less<>>& device_config_keys() {
  static const std::set<std::string, std::less<>> keys{
      "cells_per_string", "strings_per_block", "i0",        "alpha",
      "gain",             "noise_sigma",       "seed",      "sense_mode",
      "sense_threshold",  "sense_percentile"};
  return keys;
}

void apply_device_config(const KeyValueConfig& cfg, McamDeviceModel& device, SenseConfig& sense_cfg) {
  auto positive_u32 = [&](std::string_view key, std::uint32_t& field) {
    if (const auto v = cfg.get_int(key)) {
      if (*v <= 0 || *v > 0xffffffffLL) {
        throw ConfigError(std::string(key) + " must be a positive 32-bit integer");
      }
      field = static_cast<std::uint32_t>(*v);
    }
  };
  positive_u32("cells_per_string", device.geometry.cells_per_string);
  positive_u32("strings_per_block", device.geometry.strings_per_block);
  if (const auto v = cfg.get_double("i0")) device.current.i0 = *v;
  if (const auto v = cfg.get_double("alpha")) device.current.alpha = *v;
  if (const auto v = cfg.get_double("noise_sigma")) device.current.noise_sigma = *v;
  if (const auto v = cfg.get_int("seed")) device.current.seed = static_cast<std::uint64_t>(*v);
  if (const auto v = cfg.get_doubles("gain")) {
    if (v->size() != 4) throw ConfigError("gain needs exactly 4 values");
    std::copy(v->begin(), v->end(), device.current.bottleneck_gain.begin());
  }
  if (const auto v = cfg.get_string("sense_mode")) sense_cfg.mode = parse_sense_mode(*v);
  if (const auto v = cfg.get_double("sense_threshold")) sense_cfg.threshold = *v;
  if (const auto v = cfg.get_double("sense_percentile")) sense_cfg.percentile = *v;
  device.validate();
  sense_cfg.validate();
}

}  // namespace mcam
