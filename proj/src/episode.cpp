#include "mcam/episode.hpp"

#include <algorithm>
#include <map>
#include <random>
#include <string>

namespace mcam {

Episode sample_episode(const LabeledTable& table, std::size_t n_way, std::size_t k_shot,
                       std::size_t q_per_class, std::uint64_t seed) {
  if (n_way == 0 || k_shot == 0) throw ConfigError("episode needs n_way >= 1 and k_shot >= 1");
  const std::size_t need = k_shot + q_per_class;

  std::map<int, std::vector<std::size_t>> members;
  for (std::size_t r = 0; r < table.size(); ++r) members[table.labels[r]].push_back(r);
  std::vector<int> eligible;
  for (const auto& [label, rows] : members) {
    if (rows.size() >= need) eligible.push_back(label);
  }
  if (eligible.size() < n_way) {
    throw DataError("episode needs " + std::to_string(n_way) + " classes with >= " +
                    std::to_string(need) + " members; table has " + std::to_string(eligible.size()) +
                    " such classes out of " + std::to_string(members.size()));
  }

  std::mt19937_64 rng(seed);
  std::shuffle(eligible.begin(), eligible.end(), rng);
  eligible.resize(n_way);
  std::sort(eligible.begin(), eligible.end());

  Episode ep;
  for (const int label : eligible) {
    auto rows = members[label];
    std::shuffle(rows.begin(), rows.end(), rng);
    for (std::size_t i = 0; i < k_shot; ++i) {
      ep.support_rows.push_back(rows[i]);
      ep.support_labels.push_back(label);
    }
    for (std::size_t i = k_shot; i < need; ++i) {
      ep.query_rows.push_back(rows[i]);
      ep.query_labels.push_back(label);
    }
  }
  return ep;
}

}  // namespace mcam
