#pragma once

// Behavioral model of one NAND-flash MCAM block.
//
// A string of `cells_per_string` unit cells conducts a current that falls with
// its total mismatch and is additionally throttled by its worst cell:
//
//   I = i0 * gain[max_mismatch] * exp(-alpha * total_mismatch) * exp(noise_sigma * z)
//
// with z a standard normal drawn from a counter-based generator keyed by
// (seed, string, iteration, draw). Units are arbitrary.

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcam/encoding.hpp"
#include "mcam/kv_config.hpp"

namespace mcam {

struct McamGeometry {
  std::uint32_t cells_per_string = 24;
  std::uint32_t strings_per_block = 131072;

  void validate() const;
};

struct CurrentModelParams {
  double i0 = 1.0;
  // Fitted defaults: alpha = 2 * noise_sigma puts the log-current means of
  // adjacent total-mismatch levels two noise deviations apart, which gives the
  // partially overlapping distributions of the measured device
  // (overlap coefficient 2 * Phi(-1) ~= 0.32, see adjacent_overlap()).
  double alpha = 0.1;
  std::array<double, 4> bottleneck_gain{1.0, 0.85, 0.5, 0.2};
  double noise_sigma = 0.05;
  std::uint64_t seed = 0x5eed;

  // Requires i0 > 0, alpha > 0, 1 = g0 > g1 > g2 > g3 > 0, noise_sigma >= 0.
  void validate() const;
};

// Overlap coefficient of the noisy current distributions at total mismatch t
// and t + 1 for a fixed worst-cell level: 2 * Phi(-alpha / (2 * sigma)).
// Returns 0 without noise.
[[nodiscard]] double adjacent_overlap(const CurrentModelParams& params);

struct StringMismatch {
  int total = 0;
  int max = 0;
};

// Throws std::invalid_argument on a length mismatch.
[[nodiscard]] StringMismatch string_mismatch(std::span<const CodeWord> stored,
                                             std::span<const CodeWord> applied);

// Identifies one noise draw. `draw` distinguishes repeated reads of the same
// string in the same iteration (one per query).
struct NoiseKey {
  std::uint64_t string = 0;
  std::uint64_t iteration = 0;
  std::uint64_t draw = 0;
};

[[nodiscard]] double current_from_mismatch(StringMismatch m, const CurrentModelParams& params,
                                           std::optional<NoiseKey> noise = std::nullopt);

// Noise is applied only when `noise` is set and noise_sigma > 0.
[[nodiscard]] double string_current(std::span<const CodeWord> stored,
                                    std::span<const CodeWord> applied,
                                    const CurrentModelParams& params,
                                    std::optional<NoiseKey> noise = std::nullopt);

enum class SenseMode { IdealTopCurrent, FixedThreshold, Percentile };

struct SenseConfig {
  SenseMode mode = SenseMode::IdealTopCurrent;
  double threshold = 0.5;   // FixedThreshold only
  double percentile = 0.1;  // Percentile only, in (0, 1)

  void validate() const;
};

[[nodiscard]] std::string_view to_string(SenseMode mode) noexcept;
[[nodiscard]] SenseMode parse_sense_mode(std::string_view name);

// IdealTopCurrent: every maximal entry votes. FixedThreshold: current > threshold.
// Percentile: the round(p * n) largest currents vote (at least one), ties at
// the cut resolved toward the lower index. Throws std::invalid_argument on empty input.
[[nodiscard]] std::vector<bool> sense(std::span<const double> currents, const SenseConfig& cfg);

// How a support's code words are distributed over its strings.
//   DimensionMajor: string j holds words [j*C, (j+1)*C) of the dimension-major
//     word sequence. Used by the symmetric search.
//   WordColumns: dimensions are grouped C at a time; within group g, string
//     column c holds code word c of every dimension in the group, so one word
//     line carries the same dimension in every column. Used by the asymmetric
//     search and by positionally weighted B4E.
enum class LayoutOrder { DimensionMajor, WordColumns };

[[nodiscard]] std::size_t strings_per_support(std::size_t dim, std::uint32_t cl,
                                              const McamGeometry& geom, LayoutOrder order);

struct StringState {
  std::vector<CodeWord> cells;
  std::uint32_t support = 0;
  std::uint32_t sub_vector = 0;
};

struct SearchPlanLayout {
  LayoutOrder order = LayoutOrder::DimensionMajor;
  Scheme scheme = Scheme::MTMC;
  std::uint32_t cl = 1;
  std::size_t dim = 0;
  std::size_t support_count = 0;
  std::size_t strings_per_support = 0;
  // support s occupies strings [s * strings_per_support, (s + 1) * strings_per_support)
  std::vector<StringState> strings;

  [[nodiscard]] std::size_t strings_used() const noexcept { return strings.size(); }
  [[nodiscard]] const StringState& string_of(std::size_t support, std::size_t sub_vector) const {
    return strings[support * strings_per_support + sub_vector];
  }
};

// Dimension indices and code word position held by each cell of sub-vector
// `slot` under a layout; shared by layout_supports and the query-side slicing.
struct CellRef {
  std::size_t dimension = 0;
  std::uint32_t word = 0;
};
[[nodiscard]] std::vector<CellRef> slot_cells(std::size_t dim, std::uint32_t cl,
                                              const McamGeometry& geom, LayoutOrder order,
                                              std::size_t slot);

// Throws std::invalid_argument for an empty or heterogeneous support set and
// CapacityError when the block cannot hold every support.
[[nodiscard]] SearchPlanLayout layout_supports(std::span<const EncodedVector> supports,
                                               const McamGeometry& geom,
                                               LayoutOrder order = LayoutOrder::DimensionMajor);

struct McamDeviceModel {
  McamGeometry geometry;
  CurrentModelParams current;

  void validate() const {
    geometry.validate();
    current.validate();
  }
};

// Device and sense-amplifier keys accepted in config files and as CLI flags:
//   cells_per_string, strings_per_block, i0, alpha, gain (4 values), noise_sigma,
//   seed, sense_mode (ideal|threshold|percentile), sense_threshold, sense_percentile
[[nodiscard]] const std::set<std::string, std::less<>>& device_config_keys();
// Overwrites the fields present in `cfg` and validates the result.
void apply_device_config(const KeyValueConfig& cfg, McamDeviceModel& device, SenseConfig& sense);

}  // namespace mcam
