#include <cmath>
#include <random>
#include <sstream>
#include <vector>

#include "doctest.h"
#include "mcam/device.hpp"

using namespace mcam;

namespace {

// A string whose first `threes` cells mismatch by 3, then `ones` cells by 1.
std::pair<std::vector<CodeWord>, std::vector<CodeWord>> crafted(int ones, int twos, int threes) {
  std::vector<CodeWord> stored(24, CodeWord(0));
  std::vector<CodeWord> applied(24, CodeWord(0));
  int i = 0;
  for (int k = 0; k < threes; ++k) applied[i++] = CodeWord(3);
  for (int k = 0; k < twos; ++k) applied[i++] = CodeWord(2);
  for (int k = 0; k < ones; ++k) applied[i++] = CodeWord(1);
  return {stored, applied};
}

EncodedVector support(std::size_t dim, std::uint32_t cl, int level = 0) {
  EncodedVector e;
  e.scheme = Scheme::SRE;
  e.cl = cl;
  e.words.assign(dim * cl, CodeWord(level));
  return e;
}

}  // namespace

TEST_CASE("zero mismatch gives i0, any mismatch less") {
  CurrentModelParams p;
  p.i0 = 2.5;
  const auto [s, a] = crafted(0, 0, 0);
  CHECK(string_current(s, a, p) == 2.5);
  const auto [s1, a1] = crafted(1, 0, 0);
  CHECK(string_current(s1, a1, p) < 2.5);
}

TEST_CASE("bottleneck ordering at equal total mismatch") {
  CurrentModelParams p;
  const auto [s1, a1] = crafted(6, 0, 0);
  const auto [s3, a3] = crafted(0, 0, 2);
  CHECK(string_mismatch(s1, a1).total == 6);
  CHECK(string_mismatch(s3, a3).total == 6);
  CHECK(string_mismatch(s3, a3).max == 3);
  CHECK(string_current(s1, a1, p) > string_current(s3, a3, p));
}

TEST_CASE("current strictly decreasing in total and in max level") {
  CurrentModelParams p;
  for (int max = 1; max <= 3; ++max) {
    double prev = current_from_mismatch({max, max}, p);
    for (int total = max + 1; total <= 72; ++total) {
      const double cur = current_from_mismatch({total, max}, p);
      REQUIRE(cur < prev);
      prev = cur;
    }
  }
  for (int total = 3; total <= 72; ++total) {
    CHECK(current_from_mismatch({total, 1}, p) > current_from_mismatch({total, 2}, p));
    CHECK(current_from_mismatch({total, 2}, p) > current_from_mismatch({total, 3}, p));
  }
}

TEST_CASE("noise is reproducible and only scales the current") {
  CurrentModelParams p;
  p.noise_sigma = 0.2;
  const StringMismatch m{5, 2};
  const NoiseKey key{17, 3, 1};
  const double a = current_from_mismatch(m, p, key);
  CHECK(a == current_from_mismatch(m, p, key));
  CHECK(a != current_from_mismatch(m, p, NoiseKey{18, 3, 1}));
  CHECK(a != current_from_mismatch(m, p, NoiseKey{17, 3, 2}));
  const double clean = current_from_mismatch(m, p);
  auto q = p;
  q.seed = p.seed + 1;
  const double b = current_from_mismatch(m, q, key);
  CHECK(a != b);
  CHECK(a > 0.0);
  // the noise factor is independent of the mismatch
  CHECK(current_from_mismatch({9, 3}, p, key) / current_from_mismatch({9, 3}, p) ==
        doctest::Approx(a / clean).epsilon(1e-12));
}

TEST_CASE("lognormal factor has the configured spread") {
  CurrentModelParams p;
  p.noise_sigma = 0.3;
  double sum = 0.0;
  double sq = 0.0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double l = std::log(current_from_mismatch({0, 0}, p, NoiseKey{static_cast<std::uint64_t>(i), 0, 0}));
    sum += l;
    sq += l * l;
  }
  const double mean = sum / n;
  CHECK(std::abs(mean) < 0.01);
  CHECK(std::sqrt(sq / n - mean * mean) == doctest::Approx(0.3).epsilon(0.03));
}

TEST_CASE("default calibration gives partially overlapping adjacent levels") {
  CurrentModelParams p;
  const double overlap = adjacent_overlap(p);
  CHECK(overlap > 0.1);
  CHECK(overlap < 0.6);
  CHECK(overlap == doctest::Approx(std::erfc(1.0 / std::sqrt(2.0))));
  p.noise_sigma = 0.0;
  CHECK(adjacent_overlap(p) == 0.0);
}

TEST_CASE("string_mismatch rejects length mismatch") {
  const std::vector<CodeWord> a(3), b(4);
  CHECK_THROWS_AS((void)string_mismatch(a, b), std::invalid_argument);
}

TEST_CASE("current model validation") {
  CurrentModelParams p;
  p.bottleneck_gain = {1.0, 0.5, 0.6, 0.1};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p.bottleneck_gain = {0.9, 0.5, 0.3, 0.1};
  CHECK_THROWS_AS(p.validate(), ConfigError);
  p = {};
  p.alpha = 0.0;
  CHECK_THROWS_AS(p.validate(), ConfigError);
}

TEST_CASE("sense modes") {
  SenseConfig cfg;
  CHECK(sense(std::vector<double>{5.0, 3.0, 5.0}, cfg) == std::vector<bool>{true, false, true});
  cfg.mode = SenseMode::FixedThreshold;
  cfg.threshold = 2.5;
  CHECK(sense(std::vector<double>{1.0, 2.0, 3.0}, cfg) == std::vector<bool>{false, false, true});
  CHECK_THROWS_AS((void)sense(std::vector<double>{}, cfg), std::invalid_argument);
}

TEST_CASE("percentile sense selects the top fraction") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> cur(1000);
  for (auto& c : cur) c = u(rng);
  SenseConfig cfg;
  cfg.mode = SenseMode::Percentile;
  cfg.percentile = 0.1;
  const auto votes = sense(cur, cfg);
  auto sorted = cur;
  std::sort(sorted.begin(), sorted.end(), std::greater<>());
  const double cut = sorted[99];
  int n = 0;
  for (std::size_t i = 0; i < cur.size(); ++i) {
    n += votes[i];
    CHECK(votes[i] == (cur[i] >= cut));
  }
  CHECK(n == 100);
}

TEST_CASE("ideal sense is invariant to positive scaling") {
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<int> d(0, 6);
  for (int t = 0; t < 100; ++t) {
    std::vector<double> cur(20), scaled(20);
    for (std::size_t i = 0; i < cur.size(); ++i) {
      cur[i] = d(rng) * 0.25;
      scaled[i] = cur[i] * 3.7;
    }
    CHECK(sense(cur, {}) == sense(scaled, {}));
  }
}

TEST_CASE("layout string counts") {
  const McamGeometry g;
  CHECK(strings_per_support(48, 2, g, LayoutOrder::DimensionMajor) == 4);
  CHECK(strings_per_support(48, 32, g, LayoutOrder::DimensionMajor) == 64);
  CHECK(strings_per_support(480, 25, g, LayoutOrder::DimensionMajor) == 500);
  CHECK(strings_per_support(48, 32, g, LayoutOrder::WordColumns) == 64);
  CHECK(strings_per_support(50, 3, g, LayoutOrder::DimensionMajor) == 7);
  CHECK(strings_per_support(50, 3, g, LayoutOrder::WordColumns) == 9);
}

TEST_CASE("layout of the large published configurations") {
  const McamGeometry g;
  std::vector<EncodedVector> a(2000, support(48, 32));
  const auto la = layout_supports(a, g);
  CHECK(la.strings_per_support == 64);
  CHECK(la.strings_used() == 128000);
  std::vector<EncodedVector> b(250, support(480, 25));
  CHECK(layout_supports(b, g).strings_used() == 125000);
  a.resize(2049, support(48, 32));
  try {
    (void)layout_supports(a, g);
    FAIL("expected capacity error");
  } catch (const CapacityError& e) {
    CHECK(e.required() == 2049 * 64);
    CHECK(e.available() == 131072);
  }
}

TEST_CASE("layout keeps supports contiguous and code words whole") {
  const McamGeometry g;
  for (const auto order : {LayoutOrder::DimensionMajor, LayoutOrder::WordColumns}) {
    std::vector<EncodedVector> sup;
    for (int s = 0; s < 3; ++s) {
      EncodedVector e;
      e.scheme = Scheme::B4E;
      e.cl = 3;
      for (std::size_t i = 0; i < 50; ++i) {
        for (int j = 0; j < 3; ++j) e.words.emplace_back(static_cast<int>((i + j + s) % 4));
      }
      sup.push_back(e);
    }
    const auto lay = layout_supports(sup, g, order);
    std::size_t cells = 0;
    for (std::size_t s = 0; s < 3; ++s) {
      for (std::size_t j = 0; j < lay.strings_per_support; ++j) {
        const auto& str = lay.string_of(s, j);
        CHECK(str.support == s);
        CHECK(str.sub_vector == j);
        CHECK(str.cells.size() <= 24);
        const auto refs = slot_cells(50, 3, g, order, j);
        REQUIRE(refs.size() == str.cells.size());
        for (std::size_t c = 0; c < refs.size(); ++c) {
          CHECK(str.cells[c] == sup[s].words[refs[c].dimension * 3 + refs[c].word]);
        }
        cells += str.cells.size();
      }
    }
    CHECK(cells == 3 * 50 * 3);
  }
}

TEST_CASE("layout rejects heterogeneous supports") {
  const McamGeometry g;
  std::vector<EncodedVector> sup{support(48, 2), support(48, 3)};
  CHECK_THROWS_AS((void)layout_supports(sup, g), std::invalid_argument);
  CHECK_THROWS_AS((void)layout_supports(std::vector<EncodedVector>{}, g), std::invalid_argument);
}

TEST_CASE("device config keys") {
  std::istringstream in("alpha = 0.2\ngain = 1, 0.7, 0.4, 0.1\nsense-mode = threshold\nsense_threshold = 0.3\n");
  const auto kv = KeyValueConfig::parse(in);
  McamDeviceModel dev;
  SenseConfig sc;
  apply_device_config(kv, dev, sc);
  CHECK(dev.current.alpha == 0.2);
  CHECK(dev.current.bottleneck_gain[1] == 0.7);
  CHECK(sc.mode == SenseMode::FixedThreshold);
  CHECK(sc.threshold == 0.3);
  std::istringstream bad("gain = 1, 0.9\n");
  CHECK_THROWS_AS(apply_device_config(KeyValueConfig::parse(bad), dev, sc), ConfigError);
}
