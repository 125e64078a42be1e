#pragma once

// Fixed-point quantization and the four code-word encodings used to place
// vectors into 4-level MCAM unit cells:
//
//   SRE   simple repetition: a 4-level value copied into every cell.
//   B4E   base-4 digits, most significant first.
//   B4WE  B4E with the digit of weight 4^i repeated 4^i times (MSD block first).
//   MTMC  multi-bit thermometer code: value m -> (cl - n) words of x followed by
//         n words of x + 1, where x = m / cl and n = m % cl.
//
// Every function here is pure.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mcam/errors.hpp"

namespace mcam {

enum class Scheme { SRE, B4E, B4WE, MTMC };

[[nodiscard]] std::string_view to_string(Scheme scheme) noexcept;
// Accepts "sre", "b4e", "b4we", "mtmc" in any case. Throws ConfigError otherwise.
[[nodiscard]] Scheme parse_scheme(std::string_view name);

struct QuantConfig {
  std::uint32_t levels = 4;
  double clip_sigma = 3.0;
  // false: clip to [0, c*sigma]; true: clip to [mean - c*sigma, mean + c*sigma].
  bool signed_mode = false;

  // Throws ConfigError when levels < 2 or clip_sigma is not a positive finite number.
  void validate() const;
};

struct QuantizedVector {
  std::vector<std::uint32_t> values;
  QuantConfig config;

  [[nodiscard]] std::size_t dim() const noexcept { return values.size(); }
};

// One 4-level code word stored in (or applied to) an MLC unit cell.
class CodeWord {
 public:
  constexpr CodeWord() = default;
  // Throws EncodingError for levels above 3.
  constexpr explicit CodeWord(int level) : level_(checked(level)) {}

  [[nodiscard]] constexpr std::uint8_t level() const noexcept { return level_; }
  friend constexpr bool operator==(CodeWord, CodeWord) = default;

 private:
  static constexpr std::uint8_t checked(int level) {
    if (level < 0 || level > 3) throw EncodingError("code word level out of range 0..3");
    return static_cast<std::uint8_t>(level);
  }
  std::uint8_t level_ = 0;
};

// Per-dimension code word sequences, stored dimension-major:
// words[i * cl + j] is code word j of dimension i.
struct EncodedVector {
  Scheme scheme = Scheme::MTMC;
  std::uint32_t cl = 1;
  std::vector<CodeWord> words;

  [[nodiscard]] std::size_t dim() const noexcept { return cl == 0 ? 0 : words.size() / cl; }
  [[nodiscard]] std::span<const CodeWord> dimension(std::size_t i) const {
    return std::span<const CodeWord>(words).subspan(i * cl, cl);
  }
};

// Clip-then-bucket quantization. The clip range is [0, c*std] (or
// [mean - c*std, mean + c*std] in signed mode), split into `levels` equal bins;
// a value exactly on a bin edge belongs to the upper bin and the top edge
// saturates at levels - 1. Throws DataError for non-finite input and
// ConfigError for std <= 0 or an invalid config.
[[nodiscard]] QuantizedVector quantize(std::span<const double> vec, const QuantConfig& cfg,
                                       double mean, double std);
// Scalar form of the bucket rule; quantize() applies it element-wise.
[[nodiscard]] std::uint32_t quantize_scalar(double x, const QuantConfig& cfg, double mean,
                                            double std);

// Number of representable values for a scheme at a given code word length
// (B4WE takes its total length, i.e. 1, 5, 21, 85, ...).
[[nodiscard]] std::uint64_t scheme_capacity(Scheme scheme, std::uint32_t cl);
// Total B4WE code word length for `base_len` base-4 digits: sum of 4^i, i < base_len.
[[nodiscard]] std::uint32_t b4we_length(std::uint32_t base_len);
// Inverse of b4we_length; throws ConfigError if `cl` is not a valid B4WE length.
[[nodiscard]] std::uint32_t b4we_base_len(std::uint32_t cl);
// Default quantization levels to use for a scheme/cl pair (MTMC: 3*cl + 1).
[[nodiscard]] std::uint32_t default_levels(Scheme scheme, std::uint32_t cl);

[[nodiscard]] EncodedVector encode_mtmc(const QuantizedVector& v, std::uint32_t cl);
[[nodiscard]] EncodedVector encode_b4e(const QuantizedVector& v, std::uint32_t cl);
[[nodiscard]] EncodedVector encode_b4we(const QuantizedVector& v, std::uint32_t base_len);
[[nodiscard]] EncodedVector encode_sre(const QuantizedVector& v, std::uint32_t cl);
// Dispatches on scheme. For B4WE, `cl` is the total code word length.
[[nodiscard]] EncodedVector encode(const QuantizedVector& v, Scheme scheme, std::uint32_t cl);

// Exact inverse of the encoders. Throws EncodingError on words that violate
// the scheme's structure (non-monotone MTMC, non-uniform repetition blocks).
[[nodiscard]] QuantizedVector decode(const EncodedVector& e);

// Single-value helpers used by the oracle and by the hat surrogates.
[[nodiscard]] std::vector<CodeWord> encode_value(std::uint64_t m, Scheme scheme, std::uint32_t cl);
[[nodiscard]] std::uint64_t decode_value(std::span<const CodeWord> words, Scheme scheme);

[[nodiscard]] constexpr int cell_mismatch(CodeWord q, CodeWord s) noexcept {
  return q.level() > s.level() ? q.level() - s.level() : s.level() - q.level();
}

}  // namespace mcam
