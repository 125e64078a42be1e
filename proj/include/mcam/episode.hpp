#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mcam/dataset.hpp"

namespace mcam {

// Row indices into a LabeledTable. Supports are grouped by class in ascending
// label order, k_shot rows per class; queries likewise.
struct Episode {
  std::vector<std::size_t> support_rows;
  std::vector<int> support_labels;
  std::vector<std::size_t> query_rows;
  std::vector<int> query_labels;
};

// N-way K-shot draw: n_way classes among those with at least k_shot + q_per_class
// members, then disjoint support and query members per class. Deterministic in
// `seed`. Throws DataError with the available counts when the table is too
// small, ConfigError for zero-sized requests.
[[nodiscard]] Episode sample_episode(const LabeledTable& table, std::size_t n_way, std::size_t k_shot,
                                     std::size_t q_per_class, std::uint64_t seed);

}  // namespace mcam
