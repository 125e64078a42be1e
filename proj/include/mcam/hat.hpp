#pragma once

// Differentiable stand-ins for the MCAM search, used to train a feature
// extractor against the hardware's behavior.
//
// Forward passes reproduce the hard, piecewise-constant hardware functions.
// Backward passes use surrogates: the MTMC word staircase is treated as a line
// of slope 1/cl, the SA step as a sigmoid of configurable sharpness, and the
// absolute cell mismatch as sqrt(u^2 + eps^2). Every backward is the exact
// gradient of the corresponding smooth reference function, which is exposed
// alongside so callers can check it by finite differences.

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "mcam/encoding.hpp"

namespace mcam::hat {

struct SurrogateConfig {
  std::uint32_t cl = 8;
  double ste_slope = 0.0;  // 0 selects 1 / cl
  double sa_sharpness = 10.0;
  double sa_threshold = 0.0;
  double noise_sigma_train = 0.0;
  double abs_smoothing = 0.5;
  std::uint64_t seed = 0;

  [[nodiscard]] double slope() const noexcept {
    return ste_slope > 0.0 ? ste_slope : 1.0 / static_cast<double>(cl);
  }
  // Throws ConfigError on cl == 0 or non-positive slope, sharpness or smoothing.
  void validate() const;
};

struct DualValue {
  double value = 0.0;
  double grad = 0.0;  // local derivative for the chain rule
};

[[nodiscard]] double sigmoid(double x) noexcept;

// Quantizes a query to `query_levels` (at most 4) and a support to
// `support_levels` (0 selects 3 * cl + 1) over the same clip range.
[[nodiscard]] std::pair<QuantizedVector, QuantizedVector> asym_quantize_pair(
    std::span<const double> query_raw, std::span<const double> support_raw, const QuantConfig& clip,
    double mean, double std, std::uint32_t cl, std::uint32_t query_levels = 4,
    std::uint32_t support_levels = 0);

// Code word `word` (1-based, 1..cl) of the MTMC encoding of fixed-point value
// v, i.e. floor((v + word - 1) / cl) clamped to 0..3, with the straight-through
// slope as gradient. Throws std::invalid_argument for word outside 1..cl.
[[nodiscard]] DualValue mtmc_word_forward_backward(double v, std::uint32_t word, std::uint32_t cl);
[[nodiscard]] DualValue mtmc_word_forward_backward(double v, std::uint32_t word,
                                                   const SurrogateConfig& cfg);
// Linear trend of the staircase: slope * (v + word - 1) - 1/2.
[[nodiscard]] double mtmc_word_reference(double v, std::uint32_t word, const SurrogateConfig& cfg);

// Forward: 1 when current >= threshold, else 0. Backward: derivative of
// sigmoid(sharpness * (current - threshold)).
[[nodiscard]] DualValue sa_forward_backward(double current, const SurrogateConfig& cfg);
[[nodiscard]] double sa_reference(double current, const SurrogateConfig& cfg);

// Hard forward score of one support: minus the summed cell mismatch between
// the 4-level query and the support's MTMC words, plus Gaussian noise keyed by
// (seed, support_index) when noise_sigma_train > 0.
[[nodiscard]] double simulated_score(const QuantizedVector& query4, const EncodedVector& support,
                                     const SurrogateConfig& cfg, std::uint64_t support_index = 0);

struct MatchOutput {
  double score = 0.0;  // hard score (with training noise)
  double vote = 0.0;   // SA step of the score
  std::vector<double> d_query;    // d vote / d query_fp (surrogate)
  std::vector<double> d_support;  // d vote / d support_fp (surrogate)
};

// Query and support given as real fixed-point values: query in [0, 3] level
// units (rounded to the nearest level in the forward pass), support in
// [0, 3 * cl]. Throws std::invalid_argument on a dimension mismatch.
[[nodiscard]] MatchOutput simulated_match(std::span<const double> query_fp,
                                          std::span<const double> support_fp,
                                          const SurrogateConfig& cfg, std::uint64_t support_index = 0);
[[nodiscard]] std::vector<MatchOutput> simulated_match(std::span<const double> query_fp,
                                                       std::span<const std::vector<double>> supports_fp,
                                                       const SurrogateConfig& cfg);

// Smooth reference whose gradient simulated_match reports:
// sigmoid(k * (-sum_i sum_j rho(q_i - l_j(s_i)) - threshold)).
[[nodiscard]] double smooth_match(std::span<const double> query_fp, std::span<const double> support_fp,
                                  const SurrogateConfig& cfg);

// One gradient-descent step of a toy linear feature extractor through the
// surrogate block on a synthetic two-class episode. Reports the smooth episode
// loss before and after the step.
struct DemoStepReport {
  double loss_before = 0.0;
  double loss_after = 0.0;
};
[[nodiscard]] DemoStepReport demo_descent_step(std::uint64_t seed, double learning_rate = 0.05);

}  // namespace mcam::hat
