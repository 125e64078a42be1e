#pragma once

// Experiment orchestration: episodes over an encoding/code-word-length grid,
// aggregated into energy/accuracy rows for Pareto plots.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"

#include "mcam/dataset.hpp"
#include "mcam/device.hpp"
#include "mcam/encoding.hpp"
#include "mcam/episode.hpp"
#include "mcam/kv_config.hpp"
#include "mcam/search.hpp"

namespace mcam {

struct ExperimentConfig {
  // Empty path: generate `synthetic` instead of reading a file.
  std::filesystem::path dataset;
  VectorFormat format = VectorFormat::Auto;
  SyntheticSpec synthetic;

  std::size_t n_way = 20;
  std::size_t k_shot = 5;
  std::size_t query_per_class = 5;

  std::vector<Scheme> schemes{Scheme::MTMC};
  std::vector<std::uint32_t> cls{1, 2, 4, 8};
  SearchMode mode = SearchMode::AVSS;
  Accumulation accumulation = Accumulation::Vote;
  ClassAggregation aggregation = ClassAggregation::Votes;
  bool noise = true;

  McamDeviceModel device;
  SenseConfig sense;
  // levels is ignored: support levels follow the scheme, AVSS queries use 4.
  QuantConfig clip;

  std::size_t episodes = 30;
  std::uint64_t seed = 1;
  double unit_cost = 1.0;
  unsigned threads = 0;  // 0: hardware concurrency
  // Report rows without running episodes (counters only).
  bool plan_only = false;

  // Output prefix: writes <output>.csv and <output>.json when non-empty.
  std::filesystem::path output;

  void validate() const;
};

[[nodiscard]] const std::set<std::string, std::less<>>& experiment_config_keys();
// Applies keys present in `kv` (device keys included) on top of `cfg`.
void apply_experiment_config(const KeyValueConfig& kv, ExperimentConfig& cfg);

// Sampling seed of episode `episode_index` in a sweep seeded with `seed`.
[[nodiscard]] std::uint64_t episode_seed(std::uint64_t seed, std::size_t episode_index);

// One query's outcome inside an episode.
struct QueryTrace {
  std::size_t row = 0;
  int label = 0;
  int predicted = 0;
  int oracle = 0;
  std::vector<std::pair<int, double>> class_votes;
};

struct EpisodeOutcome {
  double accuracy = 0.0;
  double oracle_accuracy = 0.0;
  SearchCounters counters;
  std::vector<QueryTrace> queries;
};

// Quantizes, encodes and searches one episode. The oracle label is the exact
// L1 nearest support after the same quantization (for AVSS the query is lifted
// onto the support grid). `episode_index` re-keys the device noise.
[[nodiscard]] EpisodeOutcome evaluate_episode(const LabeledTable& table, const Episode& episode,
                                              Scheme scheme, std::uint32_t cl,
                                              const ExperimentConfig& cfg, const FeatureStats& stats,
                                              std::size_t episode_index);

struct SweepRow {
  Scheme scheme = Scheme::MTMC;
  std::uint32_t cl = 1;
  std::uint32_t support_levels = 0;
  SearchMode mode = SearchMode::AVSS;
  std::size_t iterations = 0;
  std::size_t strings = 0;
  double energy_proxy = 0.0;
  double accuracy_mean = 0.0;
  double accuracy_ci95 = 0.0;  // half-width, normal approximation
  double oracle_accuracy_mean = 0.0;
  std::vector<double> episode_accuracy;
};

struct SweepReport {
  std::vector<SweepRow> rows;
};

// Capacity is checked for every grid point before any episode runs.
[[nodiscard]] SweepReport run_sweep(const ExperimentConfig& cfg);
[[nodiscard]] SweepReport run_sweep(const ExperimentConfig& cfg, const LabeledTable& table);

void write_csv(std::ostream& out, const SweepReport& report);
[[nodiscard]] nlohmann::json to_json(const SweepReport& report);
// Writes <prefix>.csv and <prefix>.json.
void write_report(const SweepReport& report, const std::filesystem::path& prefix);

// Mean and 95% normal-approximation half-width of a sample.
struct MeanCi {
  double mean = 0.0;
  double half_width = 0.0;
};
[[nodiscard]] MeanCi mean_ci95(const std::vector<double>& xs);

}  // namespace mcam
