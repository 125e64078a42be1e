#include "mcam/encoding.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

namespace mcam {

namespace {

std::string lower(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::uint64_t pow4(std::uint32_t e) {
  if (e >= 32) throw ConfigError("base-4 exponent too large: " + std::to_string(e));
  return std::uint64_t{1} << (2 * e);
}

void require_cl(std::uint32_t cl) {
  if (cl == 0) throw ConfigError("code word length must be >= 1");
}

void check_domain(const QuantizedVector& v, std::uint64_t capacity, std::string_view scheme) {
  if (v.config.levels > capacity) {
    throw EncodingError(std::string(scheme) + ": " + std::to_string(v.config.levels) +
                        " quantization levels exceed capacity " + std::to_string(capacity));
  }
  for (std::size_t i = 0; i < v.values.size(); ++i) {
    if (v.values[i] >= capacity) {
      throw EncodingError(std::string(scheme) + ": value " + std::to_string(v.values[i]) +
                          " at dimension " + std::to_string(i) + " is not encodable (max " +
                          std::to_string(capacity - 1) + ")");
    }
  }
}

void put_mtmc(std::uint64_t m, std::uint32_t cl, std::vector<CodeWord>& out) {
  const auto x = static_cast<int>(m / cl);
  const auto n = static_cast<std::uint32_t>(m % cl);
  for (std::uint32_t j = 0; j < cl - n; ++j) out.emplace_back(x);
  for (std::uint32_t j = 0; j < n; ++j) out.emplace_back(x + 1);
}

void put_b4e(std::uint64_t m, std::uint32_t cl, std::vector<CodeWord>& out) {
  for (std::uint32_t j = 0; j < cl; ++j) {
    const std::uint32_t shift = 2 * (cl - 1 - j);
    out.emplace_back(static_cast<int>((m >> shift) & 3U));
  }
}

void put_b4we(std::uint64_t m, std::uint32_t base_len, std::vector<CodeWord>& out) {
  for (std::uint32_t j = 0; j < base_len; ++j) {
    const std::uint32_t significance = base_len - 1 - j;
    const CodeWord digit(static_cast<int>((m >> (2 * significance)) & 3U));
    out.insert(out.end(), pow4(significance), digit);
  }
}

EncodedVector encode_with(const QuantizedVector& v, Scheme scheme, std::uint32_t cl,
                          std::uint64_t capacity) {
  check_domain(v, capacity, to_string(scheme));
  EncodedVector e{scheme, cl, {}};
  e.words.reserve(v.values.size() * cl);
  for (const auto m : v.values) {
    switch (scheme) {
      case Scheme::MTMC: put_mtmc(m, cl, e.words); break;
      case Scheme::B4E: put_b4e(m, cl, e.words); break;
      case Scheme::B4WE: put_b4we(m, b4we_base_len(cl), e.words); break;
      case Scheme::SRE: e.words.insert(e.words.end(), cl, CodeWord(static_cast<int>(m))); break;
    }
  }
  return e;
}

}  // namespace

std::string_view to_string(Scheme scheme) noexcept {
  switch (scheme) {
    case Scheme::SRE: return "SRE";
    case Scheme::B4E: return "B4E";
    case Scheme::B4WE: return "B4WE";
    case Scheme::MTMC: return "MTMC";
  }
  return "?";
}

Scheme parse_scheme(std::string_view name) {
  const auto s = lower(name);
  if (s == "sre") return Scheme::SRE;
  if (s == "b4e") return Scheme::B4E;
  if (s == "b4we") return Scheme::B4WE;
  if (s == "mtmc") return Scheme::MTMC;
  throw ConfigError("unknown encoding scheme '" + std::string(name) + "'");
}

void QuantConfig::validate() const {
  if (levels < 2) throw ConfigError("quantization levels must be >= 2");
  if (!(clip_sigma > 0.0) || !std::isfinite(clip_sigma)) {
    throw ConfigError("clip_sigma must be a positive finite number");
  }
}

std::uint32_t quantize_scalar(double x, const QuantConfig& cfg, double mean, double std) {
  const double lo = cfg.signed_mode ? mean - cfg.clip_sigma * std : 0.0;
  const double hi = cfg.signed_mode ? mean + cfg.clip_sigma * std : cfg.clip_sigma * std;
  if (x <= lo) return 0;
  if (x >= hi) return cfg.levels - 1;
  const double bin = std::floor((x - lo) * cfg.levels / (hi - lo));
  return static_cast<std::uint32_t>(std::min(bin, static_cast<double>(cfg.levels - 1)));
}

QuantizedVector quantize(std::span<const double> vec, const QuantConfig& cfg, double mean,
                         double std) {
  cfg.validate();
  if (!(std > 0.0) || !std::isfinite(std)) throw ConfigError("quantize: std must be > 0");
  if (!std::isfinite(mean)) throw DataError("quantize: mean is not finite");
  QuantizedVector out{{}, cfg};
  out.values.reserve(vec.size());
  for (std::size_t i = 0; i < vec.size(); ++i) {
    if (!std::isfinite(vec[i])) {
      throw DataError("quantize: non-finite value at index " + std::to_string(i));
    }
    out.values.push_back(quantize_scalar(vec[i], cfg, mean, std));
  }
  return out;
}

std::uint64_t scheme_capacity(Scheme scheme, std::uint32_t cl) {
  require_cl(cl);
  switch (scheme) {
    case Scheme::SRE: return 4;
    case Scheme::MTMC: return std::uint64_t{3} * cl + 1;
    case Scheme::B4E: return pow4(cl);
    case Scheme::B4WE: return pow4(b4we_base_len(cl));
  }
  return 0;
}

std::uint32_t b4we_length(std::uint32_t base_len) {
  if (base_len == 0 || base_len > 15) throw ConfigError("B4WE base length must be in 1..15");
  return static_cast<std::uint32_t>((pow4(base_len) - 1) / 3);
}

std::uint32_t b4we_base_len(std::uint32_t cl) {
  for (std::uint32_t b = 1; b <= 15; ++b) {
    if (b4we_length(b) == cl) return b;
  }
  throw ConfigError("B4WE code word length must be one of 1, 5, 21, 85, ... (got " +
                    std::to_string(cl) + ")");
}

std::uint32_t default_levels(Scheme scheme, std::uint32_t cl) {
  const auto cap = scheme_capacity(scheme, cl);
  if (cap > std::numeric_limits<std::uint32_t>::max()) {
    throw ConfigError("quantization levels for " + std::string(to_string(scheme)) +
                      " cl=" + std::to_string(cl) + " do not fit in 32 bits");
  }
  return static_cast<std::uint32_t>(cap);
}

EncodedVector encode_mtmc(const QuantizedVector& v, std::uint32_t cl) {
  return encode_with(v, Scheme::MTMC, cl, scheme_capacity(Scheme::MTMC, cl));
}

EncodedVector encode_b4e(const QuantizedVector& v, std::uint32_t cl) {
  return encode_with(v, Scheme::B4E, cl, scheme_capacity(Scheme::B4E, cl));
}

EncodedVector encode_b4we(const QuantizedVector& v, std::uint32_t base_len) {
  const auto cl = b4we_length(base_len);
  return encode_with(v, Scheme::B4WE, cl, scheme_capacity(Scheme::B4WE, cl));
}

EncodedVector encode_sre(const QuantizedVector& v, std::uint32_t cl) {
  return encode_with(v, Scheme::SRE, cl, scheme_capacity(Scheme::SRE, cl));
}

EncodedVector encode(const QuantizedVector& v, Scheme scheme, std::uint32_t cl) {
  switch (scheme) {
    case Scheme::MTMC: return encode_mtmc(v, cl);
    case Scheme::B4E: return encode_b4e(v, cl);
    case Scheme::B4WE: return encode_b4we(v, b4we_base_len(cl));
    case Scheme::SRE: return encode_sre(v, cl);
  }
  throw ConfigError("unknown scheme");
}

std::vector<CodeWord> encode_value(std::uint64_t m, Scheme scheme, std::uint32_t cl) {
  if (m >= scheme_capacity(scheme, cl)) {
    throw EncodingError(std::string(to_string(scheme)) + ": value " + std::to_string(m) +
                        " is not encodable with cl=" + std::to_string(cl));
  }
  std::vector<CodeWord> out;
  out.reserve(cl);
  switch (scheme) {
    case Scheme::MTMC: put_mtmc(m, cl, out); break;
    case Scheme::B4E: put_b4e(m, cl, out); break;
    case Scheme::B4WE: put_b4we(m, b4we_base_len(cl), out); break;
    case Scheme::SRE: out.assign(cl, CodeWord(static_cast<int>(m))); break;
  }
  return out;
}

std::uint64_t decode_value(std::span<const CodeWord> words, Scheme scheme) {
  if (words.empty()) throw EncodingError("decode: empty code word sequence");
  switch (scheme) {
    case Scheme::MTMC: {
      std::uint64_t sum = 0;
      for (std::size_t j = 0; j < words.size(); ++j) {
        if (j > 0 && words[j].level() < words[j - 1].level()) {
          throw EncodingError("decode: MTMC words are not non-decreasing");
        }
        sum += words[j].level();
      }
      if (words.back().level() - words.front().level() > 1) {
        throw EncodingError("decode: MTMC words span more than one level");
      }
      return sum;
    }
    case Scheme::B4E: {
      if (words.size() > 31) throw EncodingError("decode: B4E code word too long");
      std::uint64_t m = 0;
      for (const auto w : words) m = (m << 2) | w.level();
      return m;
    }
    case Scheme::B4WE: {
      const auto base_len = b4we_base_len(static_cast<std::uint32_t>(words.size()));
      std::uint64_t m = 0;
      std::size_t pos = 0;
      for (std::uint32_t j = 0; j < base_len; ++j) {
        const auto block = pow4(base_len - 1 - j);
        const auto digit = words[pos];
        for (std::uint64_t r = 0; r < block; ++r, ++pos) {
          if (words[pos] != digit) throw EncodingError("decode: B4WE repetition block is not uniform");
        }
        m = (m << 2) | digit.level();
      }
      return m;
    }
    case Scheme::SRE: {
      for (const auto w : words) {
        if (w != words.front()) throw EncodingError("decode: SRE words are not identical");
      }
      return words.front().level();
    }
  }
  throw EncodingError("decode: unknown scheme");
}

QuantizedVector decode(const EncodedVector& e) {
  require_cl(e.cl);
  if (e.words.size() % e.cl != 0) {
    throw EncodingError("decode: word count " + std::to_string(e.words.size()) +
                        " is not a multiple of cl=" + std::to_string(e.cl));
  }
  QuantizedVector out;
  out.config.levels = default_levels(e.scheme, e.cl);
  out.values.reserve(e.dim());
  for (std::size_t i = 0; i < e.dim(); ++i) {
    out.values.push_back(static_cast<std::uint32_t>(decode_value(e.dimension(i), e.scheme)));
  }
  return out;
}

}  // namespace mcam
