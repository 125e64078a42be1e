#pragma once

// Symmetric (SVSS) and asymmetric (AVSS) vector similarity search over an
// MCAM block.
//
// SVSS applies each query sub-vector to the strings holding the matching
// support sub-vector, one sub-vector per iteration: ceil(d * cl / C) iterations
// for a string length C. AVSS keeps the query at one 4-level code word per
// dimension and applies it to every code word of that dimension at once, so it
// needs only ceil(d / C) iterations; the currents of a support's cl string
// columns are summed before sensing.
//
// Each iteration yields a matching result per support which is accumulated
// with the iteration's weight (4^significance for B4E under SVSS, 1 otherwise):
//   Vote           SA outcome (0/1) of the iteration's currents.
//   Analog         the modeled current itself.
//   ExactMismatch  minus the total cell mismatch, ignoring the current model.
// In Analog and ExactMismatch modes the SA is applied once to the accumulated
// scores to pick the voting supports.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "mcam/device.hpp"
#include "mcam/encoding.hpp"

namespace mcam {

enum class SearchMode { SVSS, AVSS };
enum class Accumulation { Vote, Analog, ExactMismatch };
enum class ClassAggregation { Votes, Scores };

[[nodiscard]] std::string_view to_string(SearchMode mode) noexcept;
[[nodiscard]] SearchMode parse_search_mode(std::string_view name);
[[nodiscard]] std::string_view to_string(Accumulation acc) noexcept;
[[nodiscard]] Accumulation parse_accumulation(std::string_view name);

struct SearchPlan {
  SearchMode mode = SearchMode::AVSS;
  McamGeometry geometry;
  SearchPlanLayout layout;
  std::size_t iterations = 0;
  std::vector<double> weights;                       // one per iteration
  std::vector<std::vector<std::size_t>> iteration_slots;  // sub-vectors sensed per iteration
  std::vector<std::vector<CellRef>> slot_cells;      // cell -> (dimension, word) per sub-vector
};

[[nodiscard]] std::size_t svss_iterations(std::size_t dim, std::uint32_t cl, const McamGeometry& geom);
[[nodiscard]] std::size_t avss_iterations(std::size_t dim, const McamGeometry& geom);

// Layout and schedule size of a search, without touching any data. SVSS over
// B4E uses word columns so each string holds a single digit significance.
struct SearchShape {
  LayoutOrder order = LayoutOrder::DimensionMajor;
  std::size_t strings_per_support = 0;
  std::size_t iterations = 0;
};
[[nodiscard]] SearchShape search_shape(SearchMode mode, Scheme scheme, std::size_t dim,
                                       std::uint32_t cl, const McamGeometry& geom);

// Lays the supports out and builds the iteration schedule. AVSS rejects
// query_levels > 4 with ConfigError. Layout errors propagate (CapacityError,
// std::invalid_argument).
[[nodiscard]] SearchPlan plan_search(SearchMode mode, std::span<const EncodedVector> supports,
                                     const McamGeometry& geom, std::uint32_t query_levels = 4);

struct SearchOptions {
  Accumulation accumulation = Accumulation::Vote;
  bool noise = true;
  // Distinguishes noise draws of different queries against the same block.
  std::uint64_t draw = 0;
  double unit_cost = 1.0;
};

struct SearchCounters {
  std::size_t iterations = 0;
  std::size_t strings_sensed = 0;
  double energy_proxy = 0.0;
};

struct EpisodeResult {
  std::vector<double> support_scores;
  // Vote mode: accumulated weighted votes. Other modes: 1 for the supports the
  // final sense selects, else 0.
  std::vector<double> support_votes;
  // Filled by predict_class: (label, total) in ascending label order.
  std::vector<std::pair<int, double>> class_votes;
  std::optional<int> predicted_class;
  SearchCounters counters;
};

// The query must share the supports' scheme and cl. Throws std::invalid_argument otherwise.
[[nodiscard]] EpisodeResult run_svss(const EncodedVector& query, const SearchPlan& plan,
                                     const McamDeviceModel& device, const SenseConfig& sense_cfg,
                                     const SearchOptions& options = {});

// The query holds one 4-level value per dimension.
[[nodiscard]] EpisodeResult run_avss(const QuantizedVector& query4, const SearchPlan& plan,
                                     const McamDeviceModel& device, const SenseConfig& sense_cfg,
                                     const SearchOptions& options = {});

// Sums per-support votes (or scores) by label, stores the totals in `result`
// and returns the best label; ties go to the lowest label.
int predict_class(EpisodeResult& result, std::span<const int> labels,
                  ClassAggregation aggregation = ClassAggregation::Votes);

}  // namespace mcam
