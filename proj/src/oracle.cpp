#include "mcam/oracle.hpp"

#include <algorithm>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string>

#include "mcam/errors.hpp"

namespace mcam::oracle {

namespace {

std::uint64_t absdiff(std::uint64_t a, std::uint64_t b) { return a > b ? a - b : b - a; }

}  // namespace

std::uint64_t l1_distance(std::span<const std::uint32_t> q, std::span<const std::uint32_t> s) {
  if (q.size() != s.size()) {
    throw std::invalid_argument("l1_distance: dimensions " + std::to_string(q.size()) + " and " +
                                std::to_string(s.size()) + " differ");
  }
  std::uint64_t d = 0;
  for (std::size_t i = 0; i < q.size(); ++i) d += absdiff(q[i], s[i]);
  return d;
}

std::uint64_t l1_distance(const QuantizedVector& q, const QuantizedVector& s) {
  return l1_distance(q.values, s.values);
}

std::uint64_t asymmetric_l1(const QuantizedVector& query4, const QuantizedVector& support,
                            std::uint32_t cl) {
  if (query4.dim() != support.dim()) {
    throw std::invalid_argument("asymmetric_l1: dimension mismatch");
  }
  std::uint64_t d = 0;
  for (std::size_t i = 0; i < query4.dim(); ++i) {
    d += absdiff(std::uint64_t{cl} * query4.values[i], support.values[i]);
  }
  return d;
}

int nn_from_distances(std::span<const std::uint64_t> distances, std::span<const int> labels) {
  if (distances.empty()) throw std::invalid_argument("nn_classify: empty support set");
  if (distances.size() != labels.size()) {
    throw std::invalid_argument("nn_classify: label count does not match support count");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < distances.size(); ++i) {
    if (distances[i] < distances[best] ||
        (distances[i] == distances[best] && labels[i] < labels[best])) {
      best = i;
    }
  }
  return labels[best];
}

int nn_classify(const QuantizedVector& query, std::span<const QuantizedVector> supports,
                std::span<const int> labels, Metric metric) {
  (void)metric;  // L1 is the only metric
  std::vector<std::uint64_t> distances;
  distances.reserve(supports.size());
  for (const auto& s : supports) distances.push_back(l1_distance(query, s));
  return nn_from_distances(distances, labels);
}

double MismatchStats::fraction(std::size_t distance, int max_mismatch) const {
  const auto& row = counts.at(distance);
  const auto total = row[0] + row[1] + row[2] + row[3];
  return total == 0 ? 0.0 : static_cast<double>(row.at(static_cast<std::size_t>(max_mismatch))) /
                                static_cast<double>(total);
}

std::uint64_t MismatchStats::pair_count() const {
  std::uint64_t n = 0;
  for (const auto& row : counts) n += row[0] + row[1] + row[2] + row[3];
  return n;
}

double MismatchStats::overall_fraction(int max_mismatch) const {
  std::uint64_t hits = 0;
  for (const auto& row : counts) hits += row.at(static_cast<std::size_t>(max_mismatch));
  const auto n = pair_count();
  return n == 0 ? 0.0 : static_cast<double>(hits) / static_cast<double>(n);
}

MismatchStats mismatch_distribution(Scheme scheme, std::uint32_t cl, std::uint32_t levels) {
  if (levels < 1) throw ConfigError("mismatch_distribution: levels must be >= 1");
  if (levels > scheme_capacity(scheme, cl)) {
    throw EncodingError("mismatch_distribution: " + std::to_string(levels) + " levels exceed " +
                        std::string(to_string(scheme)) + " capacity at cl=" + std::to_string(cl));
  }
  std::vector<std::vector<CodeWord>> codes;
  codes.reserve(levels);
  for (std::uint32_t v = 0; v < levels; ++v) codes.push_back(encode_value(v, scheme, cl));

  MismatchStats stats{scheme, cl, levels, std::vector<std::array<std::uint64_t, 4>>(levels)};
  for (std::uint32_t a = 0; a < levels; ++a) {
    for (std::uint32_t b = 0; b < levels; ++b) {
      int worst = 0;
      for (std::size_t j = 0; j < codes[a].size(); ++j) {
        worst = std::max(worst, cell_mismatch(codes[a][j], codes[b][j]));
      }
      ++stats.counts[absdiff(a, b)][static_cast<std::size_t>(worst)];
    }
  }
  return stats;
}

void write_csv(std::ostream& out, const MismatchStats& stats) {
  out << "distance,max_mismatch,fraction\n";
  for (std::size_t d = 0; d < stats.counts.size(); ++d) {
    for (int m = 0; m < 4; ++m) out << d << ',' << m << ',' << stats.fraction(d, m) << '\n';
  }
}

}  // namespace mcam::oracle
