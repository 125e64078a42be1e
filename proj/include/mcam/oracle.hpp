#pragma once

// Exact software references for the simulator: L1 distances, nearest-neighbor
// classification and exhaustive mismatch statistics of the encodings.

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "mcam/encoding.hpp"

namespace mcam::oracle {

enum class Metric { L1 };

// Throws std::invalid_argument on a dimension mismatch.
[[nodiscard]] std::uint64_t l1_distance(std::span<const std::uint32_t> q,
                                        std::span<const std::uint32_t> s);
[[nodiscard]] std::uint64_t l1_distance(const QuantizedVector& q, const QuantizedVector& s);

// L1 between a 4-level query lifted to the support grid (cl * q) and a support
// quantized to 3 * cl + 1 levels. This is what noiseless AVSS over MTMC measures.
[[nodiscard]] std::uint64_t asymmetric_l1(const QuantizedVector& query4, const QuantizedVector& support,
                                          std::uint32_t cl);

// Label of the nearest support; equidistant supports resolve to the lowest
// label. Throws std::invalid_argument for an empty support set or a label count mismatch.
[[nodiscard]] int nn_classify(const QuantizedVector& query, std::span<const QuantizedVector> supports,
                              std::span<const int> labels, Metric metric = Metric::L1);

// Nearest-neighbor decision from precomputed distances (same tie rule).
[[nodiscard]] int nn_from_distances(std::span<const std::uint64_t> distances, std::span<const int> labels);

// Maximum per-cell mismatch between the encodings of every ordered value pair
// (a, b) in [0, levels)^2, grouped by |a - b|.
struct MismatchStats {
  Scheme scheme = Scheme::MTMC;
  std::uint32_t cl = 1;
  std::uint32_t levels = 0;
  // counts[distance][max_mismatch]
  std::vector<std::array<std::uint64_t, 4>> counts;

  [[nodiscard]] double fraction(std::size_t distance, int max_mismatch) const;
  // Over all pairs regardless of distance.
  [[nodiscard]] double overall_fraction(int max_mismatch) const;
  [[nodiscard]] std::uint64_t pair_count() const;
};

// Throws EncodingError when `levels` exceeds the scheme's capacity at `cl`.
[[nodiscard]] MismatchStats mismatch_distribution(Scheme scheme, std::uint32_t cl, std::uint32_t levels);

// Rows of "distance,max_mismatch,fraction" with a header line.
void write_csv(std::ostream& out, const MismatchStats& stats);

}  // namespace mcam::oracle
