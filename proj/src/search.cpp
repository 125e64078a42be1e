#include "mcam/search.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>
#include <string>

#include "mcam/errors.hpp"

namespace mcam {

namespace {

using AppliedWords = std::vector<std::vector<CodeWord>>;

EpisodeResult execute(const AppliedWords& applied, const SearchPlan& plan,
                      const McamDeviceModel& device, const SenseConfig& sense_cfg,
                      const SearchOptions& options) {
  const auto& layout = plan.layout;
  const std::size_t supports = layout.support_count;
  EpisodeResult result;
  result.support_scores.assign(supports, 0.0);
  std::vector<double> iteration_value(supports);

  for (std::size_t it = 0; it < plan.iterations; ++it) {
    const double weight = plan.weights[it];
    for (std::size_t s = 0; s < supports; ++s) {
      double value = 0.0;
      for (const auto slot : plan.iteration_slots[it]) {
        const auto& str = layout.string_of(s, slot);
        const auto mismatch = string_mismatch(str.cells, applied[slot]);
        if (options.accumulation == Accumulation::ExactMismatch) {
          value -= mismatch.total;
        } else {
          std::optional<NoiseKey> key;
          if (options.noise) key = NoiseKey{s * layout.strings_per_support + slot, it, options.draw};
          value += current_from_mismatch(mismatch, device.current, key);
        }
      }
      iteration_value[s] = value;
    }
    if (options.accumulation == Accumulation::Vote) {
      const auto votes = sense(iteration_value, sense_cfg);
      for (std::size_t s = 0; s < supports; ++s) {
        if (votes[s]) result.support_scores[s] += weight;
      }
    } else {
      for (std::size_t s = 0; s < supports; ++s) result.support_scores[s] += weight * iteration_value[s];
    }
  }

  if (options.accumulation == Accumulation::Vote) {
    result.support_votes = result.support_scores;
  } else {
    const auto selected = sense(result.support_scores, sense_cfg);
    result.support_votes.assign(supports, 0.0);
    for (std::size_t s = 0; s < supports; ++s) result.support_votes[s] = selected[s] ? 1.0 : 0.0;
  }

  result.counters.iterations = plan.iterations;
  result.counters.strings_sensed = layout.strings_used();
  result.counters.energy_proxy = static_cast<double>(plan.iterations) *
                                 static_cast<double>(layout.strings_used()) * options.unit_cost;
  return result;
}

}  // namespace

std::string_view to_string(SearchMode mode) noexcept {
  return mode == SearchMode::SVSS ? "SVSS" : "AVSS";
}

SearchMode parse_search_mode(std::string_view name) {
  if (name == "svss" || name == "SVSS") return SearchMode::SVSS;
  if (name == "avss" || name == "AVSS") return SearchMode::AVSS;
  throw ConfigError("unknown search mode '" + std::string(name) + "'");
}

std::string_view to_string(Accumulation acc) noexcept {
  switch (acc) {
    case Accumulation::Vote: return "vote";
    case Accumulation::Analog: return "analog";
    case Accumulation::ExactMismatch: return "exact";
  }
  return "?";
}

Accumulation parse_accumulation(std::string_view name) {
  if (name == "vote") return Accumulation::Vote;
  if (name == "analog") return Accumulation::Analog;
  if (name == "exact") return Accumulation::ExactMismatch;
  throw ConfigError("unknown accumulation mode '" + std::string(name) + "'");
}

std::size_t svss_iterations(std::size_t dim, std::uint32_t cl, const McamGeometry& geom) {
  return strings_per_support(dim, cl, geom, LayoutOrder::DimensionMajor);
}

std::size_t avss_iterations(std::size_t dim, const McamGeometry& geom) {
  return (dim + geom.cells_per_string - 1) / geom.cells_per_string;
}

SearchShape search_shape(SearchMode mode, Scheme scheme, std::size_t dim, std::uint32_t cl,
                         const McamGeometry& geom) {
  SearchShape shape;
  const bool positional = mode == SearchMode::SVSS && scheme == Scheme::B4E;
  shape.order = (mode == SearchMode::AVSS || positional) ? LayoutOrder::WordColumns
                                                         : LayoutOrder::DimensionMajor;
  shape.strings_per_support = strings_per_support(dim, cl, geom, shape.order);
  shape.iterations = mode == SearchMode::AVSS ? avss_iterations(dim, geom) : shape.strings_per_support;
  return shape;
}

SearchPlan plan_search(SearchMode mode, std::span<const EncodedVector> supports,
                       const McamGeometry& geom, std::uint32_t query_levels) {
  if (mode == SearchMode::AVSS && query_levels > 4) {
    throw ConfigError("AVSS needs a 4-level query (got " + std::to_string(query_levels) + " levels)");
  }
  if (supports.empty()) throw std::invalid_argument("plan_search: empty support set");

  const auto& front = supports.front();
  const auto shape = search_shape(mode, front.scheme, front.dim(), front.cl, geom);
  const bool positional = mode == SearchMode::SVSS && front.scheme == Scheme::B4E;
  SearchPlan plan;
  plan.mode = mode;
  plan.geometry = geom;
  plan.layout = layout_supports(supports, geom, shape.order);
  plan.iterations = shape.iterations;
  const auto& layout = plan.layout;
  for (std::size_t j = 0; j < layout.strings_per_support; ++j) {
    plan.slot_cells.push_back(slot_cells(layout.dim, layout.cl, geom, shape.order, j));
  }

  if (mode == SearchMode::SVSS) {
    for (std::size_t j = 0; j < plan.iterations; ++j) {
      plan.iteration_slots.push_back({j});
      double weight = 1.0;
      if (positional) {
        // word column c of every group carries digit significance cl - 1 - c
        const auto significance = layout.cl - 1 - static_cast<std::uint32_t>(j % layout.cl);
        weight = static_cast<double>(std::uint64_t{1} << (2 * significance));
      }
      plan.weights.push_back(weight);
    }
  } else {
    for (std::size_t g = 0; g < plan.iterations; ++g) {
      std::vector<std::size_t> slots;
      for (std::uint32_t c = 0; c < layout.cl; ++c) slots.push_back(g * layout.cl + c);
      plan.iteration_slots.push_back(std::move(slots));
      plan.weights.push_back(1.0);
    }
  }
  return plan;
}

EpisodeResult run_svss(const EncodedVector& query, const SearchPlan& plan,
                       const McamDeviceModel& device, const SenseConfig& sense_cfg,
                       const SearchOptions& options) {
  if (plan.mode != SearchMode::SVSS) throw std::invalid_argument("run_svss: plan is not SVSS");
  const auto& layout = plan.layout;
  if (query.scheme != layout.scheme || query.cl != layout.cl) {
    throw std::invalid_argument("run_svss: query encoded as " + std::string(to_string(query.scheme)) +
                                "/cl=" + std::to_string(query.cl) + " but supports are " +
                                std::string(to_string(layout.scheme)) + "/cl=" +
                                std::to_string(layout.cl));
  }
  if (query.words.size() != layout.dim * layout.cl) {
    throw std::invalid_argument("run_svss: query dimension does not match supports");
  }
  AppliedWords applied(plan.slot_cells.size());
  for (std::size_t j = 0; j < plan.slot_cells.size(); ++j) {
    for (const auto& ref : plan.slot_cells[j]) {
      applied[j].push_back(query.words[ref.dimension * layout.cl + ref.word]);
    }
  }
  return execute(applied, plan, device, sense_cfg, options);
}

EpisodeResult run_avss(const QuantizedVector& query4, const SearchPlan& plan,
                       const McamDeviceModel& device, const SenseConfig& sense_cfg,
                       const SearchOptions& options) {
  if (plan.mode != SearchMode::AVSS) throw std::invalid_argument("run_avss: plan is not AVSS");
  if (query4.config.levels > 4) {
    throw ConfigError("AVSS needs a 4-level query (got " + std::to_string(query4.config.levels) +
                      " levels)");
  }
  if (query4.dim() != plan.layout.dim) {
    throw std::invalid_argument("run_avss: query dimension " + std::to_string(query4.dim()) +
                                " does not match supports (" + std::to_string(plan.layout.dim) + ")");
  }
  AppliedWords applied(plan.slot_cells.size());
  for (std::size_t j = 0; j < plan.slot_cells.size(); ++j) {
    for (const auto& ref : plan.slot_cells[j]) {
      applied[j].emplace_back(static_cast<int>(query4.values[ref.dimension]));
    }
  }
  return execute(applied, plan, device, sense_cfg, options);
}

int predict_class(EpisodeResult& result, std::span<const int> labels, ClassAggregation aggregation) {
  if (labels.empty()) throw std::invalid_argument("predict_class: empty support set");
  const auto& per_support =
      aggregation == ClassAggregation::Votes ? result.support_votes : result.support_scores;
  if (per_support.size() != labels.size()) {
    throw std::invalid_argument("predict_class: " + std::to_string(labels.size()) + " labels for " +
                                std::to_string(per_support.size()) + " supports");
  }
  std::map<int, double> totals;
  for (std::size_t s = 0; s < labels.size(); ++s) totals[labels[s]] += per_support[s];
  result.class_votes.assign(totals.begin(), totals.end());
  auto best = result.class_votes.begin();
  for (auto it = result.class_votes.begin(); it != result.class_votes.end(); ++it) {
    if (it->second > best->second) best = it;
  }
  result.predicted_class = best->first;
  return best->first;
}

}  // namespace mcam
