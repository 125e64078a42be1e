#include "mcam/hat.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

#include "mcam/errors.hpp"
#include "mcam/noise.hpp"

namespace mcam::hat {

namespace {

double smooth_abs(double u, double eps) { return std::sqrt(u * u + eps * eps); }
double smooth_abs_grad(double u, double eps) { return u / std::sqrt(u * u + eps * eps); }

double sigmoid_grad(double x) {
  const double s = sigmoid(x);
  return s * (1.0 - s);
}

int hard_query_level(double q) {
  return static_cast<int>(std::clamp(std::floor(q + 0.5), 0.0, 3.0));
}

double hard_word(double v, std::uint32_t word, std::uint32_t cl) {
  return std::clamp(std::floor((v + word - 1.0) / cl), 0.0, 3.0);
}

void check_dims(std::size_t a, std::size_t b) {
  if (a != b) {
    throw std::invalid_argument("simulated_match: query has " + std::to_string(a) +
                                " dimensions, support has " + std::to_string(b));
  }
}

double training_noise(const SurrogateConfig& cfg, std::uint64_t support_index) {
  if (cfg.noise_sigma_train <= 0.0) return 0.0;
  return cfg.noise_sigma_train * noise::standard_normal(cfg.seed, support_index, 0x4a7, 0);
}

// Smooth score -sum rho(q_i - l_j(s_i)) and its partial derivatives.
double smooth_score(std::span<const double> q, std::span<const double> s, const SurrogateConfig& cfg,
                    std::vector<double>* dq, std::vector<double>* ds) {
  double score = 0.0;
  if (dq) dq->assign(q.size(), 0.0);
  if (ds) ds->assign(q.size(), 0.0);
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (std::uint32_t j = 1; j <= cfg.cl; ++j) {
      const double u = q[i] - mtmc_word_reference(s[i], j, cfg);
      score -= smooth_abs(u, cfg.abs_smoothing);
      const double g = smooth_abs_grad(u, cfg.abs_smoothing);
      if (dq) (*dq)[i] -= g;
      if (ds) (*ds)[i] += g * cfg.slope();
    }
  }
  return score;
}

}  // namespace

void SurrogateConfig::validate() const {
  if (cl == 0) throw ConfigError("surrogate cl must be >= 1");
  if (ste_slope < 0.0) throw ConfigError("ste_slope must be > 0 (or 0 for 1/cl)");
  if (!(sa_sharpness > 0.0)) throw ConfigError("sa_sharpness must be > 0");
  if (!(abs_smoothing > 0.0)) throw ConfigError("abs_smoothing must be > 0");
  if (!(noise_sigma_train >= 0.0)) throw ConfigError("noise_sigma_train must be >= 0");
}

double sigmoid(double x) noexcept {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

std::pair<QuantizedVector, QuantizedVector> asym_quantize_pair(
    std::span<const double> query_raw, std::span<const double> support_raw, const QuantConfig& clip,
    double mean, double std, std::uint32_t cl, std::uint32_t query_levels,
    std::uint32_t support_levels) {
  if (query_levels < 2 || query_levels > 4) {
    throw ConfigError("query levels must be in 2..4 (got " + std::to_string(query_levels) + ")");
  }
  if (cl == 0) throw ConfigError("cl must be >= 1");
  QuantConfig qcfg = clip;
  qcfg.levels = query_levels;
  QuantConfig scfg = clip;
  scfg.levels = support_levels == 0 ? 3 * cl + 1 : support_levels;
  if (scfg.levels < 2) throw ConfigError("support levels must be >= 2");
  return {quantize(query_raw, qcfg, mean, std), quantize(support_raw, scfg, mean, std)};
}

DualValue mtmc_word_forward_backward(double v, std::uint32_t word, const SurrogateConfig& cfg) {
  if (word < 1 || word > cfg.cl) {
    throw std::invalid_argument("mtmc word index " + std::to_string(word) + " outside 1.." +
                                std::to_string(cfg.cl));
  }
  return {hard_word(v, word, cfg.cl), cfg.slope()};
}

DualValue mtmc_word_forward_backward(double v, std::uint32_t word, std::uint32_t cl) {
  SurrogateConfig cfg;
  cfg.cl = cl;
  return mtmc_word_forward_backward(v, word, cfg);
}

double mtmc_word_reference(double v, std::uint32_t word, const SurrogateConfig& cfg) {
  return cfg.slope() * (v + word - 1.0) - 0.5;
}

DualValue sa_forward_backward(double current, const SurrogateConfig& cfg) {
  const double x = cfg.sa_sharpness * (current - cfg.sa_threshold);
  return {current >= cfg.sa_threshold ? 1.0 : 0.0, cfg.sa_sharpness * sigmoid_grad(x)};
}

double sa_reference(double current, const SurrogateConfig& cfg) {
  return sigmoid(cfg.sa_sharpness * (current - cfg.sa_threshold));
}

double simulated_score(const QuantizedVector& query4, const EncodedVector& support,
                       const SurrogateConfig& cfg, std::uint64_t support_index) {
  if (query4.config.levels > 4) throw ConfigError("simulated_score: query must have at most 4 levels");
  check_dims(query4.dim(), support.dim());
  long total = 0;
  for (std::size_t i = 0; i < query4.dim(); ++i) {
    const CodeWord q(static_cast<int>(query4.values[i]));
    for (const auto w : support.dimension(i)) total += cell_mismatch(q, w);
  }
  return -static_cast<double>(total) + training_noise(cfg, support_index);
}

MatchOutput simulated_match(std::span<const double> query_fp, std::span<const double> support_fp,
                            const SurrogateConfig& cfg, std::uint64_t support_index) {
  cfg.validate();
  check_dims(query_fp.size(), support_fp.size());
  MatchOutput out;
  long total = 0;
  for (std::size_t i = 0; i < query_fp.size(); ++i) {
    const int q = hard_query_level(query_fp[i]);
    for (std::uint32_t j = 1; j <= cfg.cl; ++j) {
      total += std::abs(q - static_cast<int>(hard_word(support_fp[i], j, cfg.cl)));
    }
  }
  out.score = -static_cast<double>(total) + training_noise(cfg, support_index);
  out.vote = sa_forward_backward(out.score, cfg).value;

  const double smooth = smooth_score(query_fp, support_fp, cfg, &out.d_query, &out.d_support);
  const double dvote = sa_forward_backward(smooth, cfg).grad;
  for (auto& g : out.d_query) g *= dvote;
  for (auto& g : out.d_support) g *= dvote;
  return out;
}

std::vector<MatchOutput> simulated_match(std::span<const double> query_fp,
                                         std::span<const std::vector<double>> supports_fp,
                                         const SurrogateConfig& cfg) {
  std::vector<MatchOutput> out;
  out.reserve(supports_fp.size());
  for (std::size_t s = 0; s < supports_fp.size(); ++s) {
    out.push_back(simulated_match(query_fp, supports_fp[s], cfg, s));
  }
  return out;
}

double smooth_match(std::span<const double> query_fp, std::span<const double> support_fp,
                    const SurrogateConfig& cfg) {
  check_dims(query_fp.size(), support_fp.size());
  return sa_reference(smooth_score(query_fp, support_fp, cfg, nullptr, nullptr), cfg);
}

DemoStepReport demo_descent_step(std::uint64_t seed, double learning_rate) {
  constexpr std::size_t kIn = 6;
  constexpr std::size_t kFeat = 4;
  constexpr std::size_t kClasses = 2;
  constexpr std::size_t kShots = 2;
  SurrogateConfig cfg;
  cfg.cl = 4;
  cfg.sa_sharpness = 0.5;
  cfg.sa_threshold = -8.0;

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> weights(kFeat * kIn);
  for (auto& w : weights) w = 0.3 * normal(rng);

  // inputs[c][0] is the query of class c, the rest are its shots.
  std::vector<std::vector<std::vector<double>>> inputs(kClasses);
  for (auto& cls : inputs) {
    std::vector<double> proto(kIn);
    for (auto& p : proto) p = normal(rng);
    for (std::size_t n = 0; n < kShots + 1; ++n) {
      std::vector<double> x(kIn);
      for (std::size_t k = 0; k < kIn; ++k) x[k] = proto[k] + 0.3 * normal(rng);
      cls.push_back(std::move(x));
    }
  }

  auto features = [&](const std::vector<double>& w, const std::vector<double>& x) {
    std::vector<double> f(kFeat);
    for (std::size_t i = 0; i < kFeat; ++i) {
      double a = 0.0;
      for (std::size_t k = 0; k < kIn; ++k) a += w[i * kIn + k] * x[k];
      f[i] = sigmoid(a);
    }
    return f;
  };
  auto scaled = [](std::vector<double> f, double scale) {
    for (auto& v : f) v *= scale;
    return f;
  };
  const double support_scale = 3.0 * cfg.cl;

  // Cross-entropy over per-class sums of smooth votes, averaged over queries.
  auto loss_and_grad = [&](const std::vector<double>& w, std::vector<double>* grad) {
    if (grad) grad->assign(w.size(), 0.0);
    double loss = 0.0;
    for (std::size_t qc = 0; qc < kClasses; ++qc) {
      const auto fq = features(w, inputs[qc][0]);
      const auto q = scaled(fq, 3.0);
      std::vector<double> logits(kClasses, 0.0);
      std::vector<std::vector<MatchOutput>> matches(kClasses);
      for (std::size_t c = 0; c < kClasses; ++c) {
        for (std::size_t n = 1; n <= kShots; ++n) {
          const auto s = scaled(features(w, inputs[c][n]), support_scale);
          logits[c] += smooth_match(q, s, cfg);
          if (grad) matches[c].push_back(simulated_match(q, s, cfg));
        }
      }
      const double mx = *std::max_element(logits.begin(), logits.end());
      double z = 0.0;
      for (const double l : logits) z += std::exp(l - mx);
      loss += -(logits[qc] - mx - std::log(z)) / kClasses;
      if (!grad) continue;
      for (std::size_t c = 0; c < kClasses; ++c) {
        const double dlogit = (std::exp(logits[c] - mx) / z - (c == qc ? 1.0 : 0.0)) / kClasses;
        for (std::size_t n = 1; n <= kShots; ++n) {
          const auto fs = features(w, inputs[c][n]);
          const auto& m = matches[c][n - 1];
          for (std::size_t i = 0; i < kFeat; ++i) {
            const double gq = dlogit * m.d_query[i] * 3.0 * fq[i] * (1.0 - fq[i]);
            const double gs = dlogit * m.d_support[i] * support_scale * fs[i] * (1.0 - fs[i]);
            for (std::size_t k = 0; k < kIn; ++k) {
              (*grad)[i * kIn + k] += gq * inputs[qc][0][k] + gs * inputs[c][n][k];
            }
          }
        }
      }
    }
    return loss;
  };

  std::vector<double> grad;
  DemoStepReport report;
  report.loss_before = loss_and_grad(weights, &grad);
  for (std::size_t k = 0; k < weights.size(); ++k) weights[k] -= learning_rate * grad[k];
  report.loss_after = loss_and_grad(weights, nullptr);
  return report;
}

}  // namespace mcam::hat
