#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <vector>

#include "doctest.h"
#include "mcam/encoding.hpp"

using namespace mcam;

namespace {

QuantizedVector qv(std::vector<std::uint32_t> values, std::uint32_t levels) {
  QuantizedVector v;
  v.values = std::move(values);
  v.config.levels = levels;
  return v;
}

std::vector<int> levels_of(const EncodedVector& e) {
  std::vector<int> out;
  for (const auto w : e.words) out.push_back(w.level());
  return out;
}

std::vector<int> levels_of(const std::vector<CodeWord>& words) {
  std::vector<int> out;
  for (const auto w : words) out.push_back(w.level());
  return out;
}

// Independent scalar reference for the clip-then-bucket rule.
std::uint32_t reference_bucket(double x, double lo, double hi, std::uint32_t levels) {
  if (x <= lo) return 0;
  if (x >= hi) return levels - 1;
  const double width = (hi - lo) / levels;
  std::uint32_t b = 0;
  while (b + 1 < levels && x >= lo + (b + 1) * width) ++b;
  return b;
}

int b4e_digit(std::uint64_t m, std::uint32_t cl, std::uint32_t j) {
  // digit j counted from the most significant end
  for (std::uint32_t k = 0; k + 1 + j < cl; ++k) m /= 4;
  return static_cast<int>(m % 4);
}

}  // namespace

TEST_CASE("scheme names round trip") {
  for (const auto s : {Scheme::SRE, Scheme::B4E, Scheme::B4WE, Scheme::MTMC}) {
    CHECK(parse_scheme(to_string(s)) == s);
  }
  CHECK(parse_scheme("mtmc") == Scheme::MTMC);
  CHECK_THROWS_AS((void)parse_scheme("gray"), ConfigError);
}

TEST_CASE("code words reject levels outside 0..3") {
  CHECK(CodeWord(3).level() == 3);
  CHECK_THROWS_AS(CodeWord(4), EncodingError);
  CHECK_THROWS_AS(CodeWord(-1), EncodingError);
}

TEST_CASE("quantize endpoints and saturation") {
  QuantConfig cfg;
  cfg.levels = 16;
  cfg.clip_sigma = 3.0;
  const double clipmax = 3.0 * 2.0;
  const std::vector<double> v{0.0, clipmax, 100.0, -5.0};
  const auto q = quantize(v, cfg, 0.0, 2.0);
  CHECK(q.values == std::vector<std::uint32_t>{0, 15, 15, 0});
  CHECK(q.config.levels == 16);
}

TEST_CASE("quantize matches an element-wise clip-then-bucket reference") {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> dist(1.0, 0.8);
  std::vector<double> xs(1000);
  for (auto& x : xs) x = dist(rng);
  for (const bool signed_mode : {false, true}) {
    for (const std::uint32_t levels : {4U, 13U, 16U, 25U}) {
      QuantConfig cfg;
      cfg.levels = levels;
      cfg.clip_sigma = 2.5;
      cfg.signed_mode = signed_mode;
      const double mean = 1.0;
      const double sd = 0.8;
      const double lo = signed_mode ? mean - 2.5 * sd : 0.0;
      const double hi = signed_mode ? mean + 2.5 * sd : 2.5 * sd;
      const auto q = quantize(xs, cfg, mean, sd);
      std::vector<int> hist(levels), ref_hist(levels);
      for (std::size_t i = 0; i < xs.size(); ++i) {
        ++hist[q.values[i]];
        ++ref_hist[reference_bucket(xs[i], lo, hi, levels)];
      }
      CHECK(hist == ref_hist);
    }
  }
}

TEST_CASE("quantize rejects bad input") {
  QuantConfig cfg;
  const std::vector<double> nan{std::numeric_limits<double>::quiet_NaN()};
  const std::vector<double> inf{std::numeric_limits<double>::infinity()};
  const std::vector<double> ok{1.0};
  CHECK_THROWS_AS((void)quantize(nan, cfg, 0.0, 1.0), DataError);
  CHECK_THROWS_AS((void)quantize(inf, cfg, 0.0, 1.0), DataError);
  CHECK_THROWS_AS((void)quantize(ok, cfg, 0.0, 0.0), ConfigError);
  cfg.levels = 1;
  CHECK_THROWS_AS((void)quantize(ok, cfg, 0.0, 1.0), ConfigError);
  cfg.levels = 4;
  cfg.clip_sigma = -1.0;
  CHECK_THROWS_AS((void)quantize(ok, cfg, 0.0, 1.0), ConfigError);
}

TEST_CASE("MTMC code words") {
  CHECK(levels_of(encode_mtmc(qv({7}, 16), 5)) == std::vector<int>{1, 1, 1, 2, 2});
  CHECK(levels_of(encode_mtmc(qv({0}, 16), 5)) == std::vector<int>{0, 0, 0, 0, 0});
  CHECK(levels_of(encode_mtmc(qv({12}, 16), 5)) == std::vector<int>{2, 2, 2, 3, 3});
  CHECK(levels_of(encode_mtmc(qv({1}, 16), 5)) == std::vector<int>{0, 0, 0, 0, 1});
  CHECK_THROWS_AS((void)encode_mtmc(qv({16}, 17), 5), EncodingError);
  CHECK_THROWS_AS((void)encode_mtmc(qv({0}, 17), 5), EncodingError);
}

TEST_CASE("B4E code words") {
  CHECK(levels_of(encode_b4e(qv({7}, 16), 2)) == std::vector<int>{1, 3});
  CHECK(levels_of(encode_b4e(qv({0}, 64), 3)) == std::vector<int>{0, 0, 0});
  CHECK(levels_of(encode_b4e(qv({14}, 64), 3)) == std::vector<int>{0, 3, 2});
  CHECK(levels_of(encode_b4e(qv({30}, 64), 3)) == std::vector<int>{1, 3, 2});
  CHECK_THROWS_AS((void)encode_b4e(qv({64}, 65), 3), EncodingError);
}

TEST_CASE("B4WE code words") {
  CHECK(levels_of(encode_b4we(qv({7}, 16), 2)) == std::vector<int>{1, 1, 1, 1, 3});
  CHECK(levels_of(encode_b4we(qv({3}, 4), 1)) == std::vector<int>{3});
  const auto all3 = encode_b4we(qv({63}, 64), 3);
  CHECK(all3.cl == 21);
  CHECK(levels_of(all3) == std::vector<int>(21, 3));
  CHECK(b4we_length(1) == 1);
  CHECK(b4we_length(2) == 5);
  CHECK(b4we_length(3) == 21);
  CHECK(b4we_base_len(21) == 3);
  CHECK_THROWS_AS((void)b4we_base_len(4), ConfigError);
  CHECK(levels_of(encode(qv({7}, 16), Scheme::B4WE, 5)) == std::vector<int>{1, 1, 1, 1, 3});
}

TEST_CASE("SRE code words") {
  CHECK(levels_of(encode_sre(qv({2}, 4), 3)) == std::vector<int>{2, 2, 2});
  CHECK(levels_of(encode_sre(qv({0}, 4), 32)) == std::vector<int>(32, 0));
  for (std::uint32_t m = 0; m < 4; ++m) CHECK(decode(encode_sre(qv({m}, 4), 7)).values[0] == m);
  CHECK_THROWS_AS((void)encode_sre(qv({1}, 5), 3), EncodingError);
}

TEST_CASE("decode inverts every encoder exhaustively for cl <= 8") {
  for (const auto scheme : {Scheme::SRE, Scheme::B4E, Scheme::MTMC}) {
    for (std::uint32_t cl = 1; cl <= 8; ++cl) {
      const auto cap = std::min<std::uint64_t>(scheme_capacity(scheme, cl), 1U << 16);
      std::vector<std::uint32_t> all(cap);
      for (std::uint32_t m = 0; m < cap; ++m) all[m] = m;
      const auto v = qv(all, static_cast<std::uint32_t>(cap));
      const auto e = encode(v, scheme, cl);
      CHECK(e.words.size() == cap * cl);
      CHECK(decode(e).values == all);
    }
  }
  for (std::uint32_t base = 1; base <= 3; ++base) {
    const auto cap = static_cast<std::uint32_t>(scheme_capacity(Scheme::B4WE, b4we_length(base)));
    std::vector<std::uint32_t> all(cap);
    for (std::uint32_t m = 0; m < cap; ++m) all[m] = m;
    CHECK(decode(encode_b4we(qv(all, cap), base)).values == all);
  }
}

TEST_CASE("decode rejects malformed words") {
  EncodedVector e;
  e.scheme = Scheme::MTMC;
  e.cl = 3;
  e.words = {CodeWord(2), CodeWord(1), CodeWord(1)};
  CHECK_THROWS_AS((void)decode(e), EncodingError);
  e.words = {CodeWord(0), CodeWord(1), CodeWord(2)};
  CHECK_THROWS_AS((void)decode(e), EncodingError);
  e.scheme = Scheme::SRE;
  e.words = {CodeWord(1), CodeWord(1), CodeWord(2)};
  CHECK_THROWS_AS((void)decode(e), EncodingError);
  e.scheme = Scheme::B4WE;
  e.cl = 5;
  e.words = {CodeWord(1), CodeWord(2), CodeWord(1), CodeWord(1), CodeWord(3)};
  CHECK_THROWS_AS((void)decode(e), EncodingError);
}

TEST_CASE("B4E digits follow the base-4 expansion") {
  for (std::uint32_t cl = 1; cl <= 5; ++cl) {
    const auto cap = scheme_capacity(Scheme::B4E, cl);
    for (std::uint64_t m = 0; m < cap; ++m) {
      const auto words = encode_value(m, Scheme::B4E, cl);
      for (std::uint32_t j = 0; j < cl; ++j) REQUIRE(words[j].level() == b4e_digit(m, cl, j));
    }
  }
}

TEST_CASE("cell mismatch") {
  CHECK(cell_mismatch(CodeWord(0), CodeWord(3)) == 3);
  CHECK(cell_mismatch(CodeWord(2), CodeWord(2)) == 0);
  for (int a = 0; a < 4; ++a) {
    for (int b = 0; b < 4; ++b) {
      CHECK(cell_mismatch(CodeWord(a), CodeWord(b)) == cell_mismatch(CodeWord(b), CodeWord(a)));
      CHECK(cell_mismatch(CodeWord(a), CodeWord(b)) == std::abs(a - b));
    }
  }
}

TEST_CASE("MTMC bounded mismatch below distance cl") {
  for (std::uint32_t cl = 1; cl <= 8; ++cl) {
    const std::uint64_t cap = 3 * cl + 1;
    for (std::uint64_t a = 0; a < cap; ++a) {
      const auto ea = encode_value(a, Scheme::MTMC, cl);
      for (std::uint64_t b = 0; b < cap; ++b) {
        const auto eb = encode_value(b, Scheme::MTMC, cl);
        int worst = 0;
        int total = 0;
        for (std::uint32_t j = 0; j < cl; ++j) {
          worst = std::max(worst, cell_mismatch(ea[j], eb[j]));
          total += cell_mismatch(ea[j], eb[j]);
        }
        const auto dist = a > b ? a - b : b - a;
        if (dist < cl) REQUIRE(worst <= 1);
        REQUIRE(static_cast<std::uint64_t>(total) == dist);
      }
    }
  }
}

TEST_CASE("B4E has a distance-1 pair with mismatch 3 for every cl >= 2") {
  for (std::uint32_t cl = 2; cl <= 8; ++cl) {
    std::uint64_t p = 1;
    for (std::uint32_t k = 1; k < cl; ++k) p *= 4;
    const auto lo = encode_value(p - 1, Scheme::B4E, cl);
    const auto hi = encode_value(p, Scheme::B4E, cl);
    int worst = 0;
    for (std::uint32_t j = 0; j < cl; ++j) worst = std::max(worst, cell_mismatch(lo[j], hi[j]));
    CHECK(worst == 3);
  }
}

TEST_CASE("default levels and capacity") {
  CHECK(default_levels(Scheme::MTMC, 5) == 16);
  CHECK(default_levels(Scheme::SRE, 9) == 4);
  CHECK(default_levels(Scheme::B4E, 3) == 64);
  CHECK(scheme_capacity(Scheme::B4WE, 21) == 64);
  CHECK(levels_of(encode_value(7, Scheme::MTMC, 5)) == std::vector<int>{1, 1, 1, 2, 2});
  CHECK(decode_value(encode_value(12, Scheme::MTMC, 5), Scheme::MTMC) == 12);
}
