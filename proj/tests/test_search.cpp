#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "mcam/oracle.hpp"
#include "mcam/search.hpp"

using namespace mcam;

namespace {

QuantizedVector random_qv(std::mt19937_64& rng, std::size_t dim, std::uint32_t levels) {
  std::uniform_int_distribution<std::uint32_t> d(0, levels - 1);
  QuantizedVector v;
  v.config.levels = levels;
  for (std::size_t i = 0; i < dim; ++i) v.values.push_back(d(rng));
  return v;
}

McamDeviceModel noiseless() {
  McamDeviceModel dev;
  dev.current.noise_sigma = 0.0;
  return dev;
}

SearchOptions exact() {
  SearchOptions o;
  o.accumulation = Accumulation::ExactMismatch;
  o.noise = false;
  return o;
}

}  // namespace

TEST_CASE("iteration formulas over a wide grid") {
  const McamGeometry g;
  for (std::size_t d = 1; d <= 1024; d += 7) {
    for (std::uint32_t cl = 1; cl <= 64; ++cl) {
      REQUIRE(svss_iterations(d, cl, g) == (d * cl + 23) / 24);
      REQUIRE(avss_iterations(d, g) == (d + 23) / 24);
    }
  }
  CHECK(svss_iterations(48, 32, g) == 64);
  CHECK(avss_iterations(48, g) == 2);
  CHECK(svss_iterations(480, 25, g) == 500);
  CHECK(avss_iterations(480, g) == 20);
}

TEST_CASE("plans carry the schedule and weights") {
  const McamGeometry g;
  std::mt19937_64 rng(1);
  std::vector<EncodedVector> sup;
  for (int s = 0; s < 4; ++s) sup.push_back(encode(random_qv(rng, 48, 97), Scheme::MTMC, 32));
  const auto svss = plan_search(SearchMode::SVSS, sup, g, 97);
  CHECK(svss.iterations == 64);
  CHECK(svss.weights == std::vector<double>(64, 1.0));
  const auto avss = plan_search(SearchMode::AVSS, sup, g, 4);
  CHECK(avss.iterations == 2);
  CHECK(avss.weights.size() == 2);
  CHECK(avss.iteration_slots[0].size() == 32);
  CHECK_THROWS_AS((void)plan_search(SearchMode::AVSS, sup, g, 5), ConfigError);

  std::vector<EncodedVector> b4e;
  for (int s = 0; s < 2; ++s) b4e.push_back(encode(random_qv(rng, 48, 64), Scheme::B4E, 3));
  const auto pos = plan_search(SearchMode::SVSS, b4e, g, 64);
  CHECK(pos.weights == std::vector<double>{16, 4, 1, 16, 4, 1});
}

TEST_CASE("identical support wins every SVSS iteration") {
  const McamGeometry g;
  std::mt19937_64 rng(2);
  for (const auto scheme : {Scheme::MTMC, Scheme::SRE, Scheme::B4E}) {
    const std::uint32_t cl = 3;
    const auto levels = default_levels(scheme, cl);
    std::vector<QuantizedVector> q;
    std::vector<EncodedVector> sup;
    for (int s = 0; s < 5; ++s) {
      q.push_back(random_qv(rng, 40, levels));
      sup.push_back(encode(q.back(), scheme, cl));
    }
    const auto plan = plan_search(SearchMode::SVSS, sup, g, levels);
    SearchOptions o;
    o.noise = false;
    auto r = run_svss(sup[2], plan, noiseless(), {}, o);
    double all = 0.0;
    for (const double w : plan.weights) all += w;
    CHECK(r.support_scores[2] == all);
    const std::vector<int> labels{0, 1, 2, 3, 4};
    CHECK(predict_class(r, labels) == 2);
    CHECK(r.counters.iterations == plan.iterations);
  }
}

TEST_CASE("SVSS rejects a query of another scheme") {
  const McamGeometry g;
  std::mt19937_64 rng(3);
  const auto q = random_qv(rng, 24, 4);
  std::vector<EncodedVector> sup{encode(q, Scheme::SRE, 2)};
  const auto plan = plan_search(SearchMode::SVSS, sup, g, 4);
  CHECK_THROWS_AS((void)run_svss(encode(q, Scheme::B4E, 2), plan, noiseless(), {}), std::invalid_argument);
  CHECK_THROWS_AS((void)run_avss(q, plan, noiseless(), {}), std::invalid_argument);
}

TEST_CASE("fixed threshold votes follow a hand trace") {
  // One dimension, SRE cl=1, three supports holding 0, 1, 3; query 0.
  // Noiseless currents: exp(0)=1, 0.85*exp(-0.1), 0.2*exp(-0.3).
  McamGeometry g;
  std::vector<EncodedVector> sup;
  for (const std::uint32_t m : {0U, 1U, 3U}) {
    QuantizedVector v;
    v.config.levels = 4;
    v.values = {m};
    sup.push_back(encode(v, Scheme::SRE, 1));
  }
  const auto plan = plan_search(SearchMode::SVSS, sup, g, 4);
  SenseConfig sc;
  sc.mode = SenseMode::FixedThreshold;
  sc.threshold = 0.5;
  SearchOptions o;
  o.noise = false;
  QuantizedVector q;
  q.config.levels = 4;
  q.values = {0};
  const auto r = run_svss(encode(q, Scheme::SRE, 1), plan, noiseless(), sc, o);
  CHECK(r.support_votes == std::vector<double>{1.0, 1.0, 0.0});
  sc.threshold = 0.8;
  const auto r2 = run_svss(encode(q, Scheme::SRE, 1), plan, noiseless(), sc, o);
  CHECK(r2.support_votes == std::vector<double>{1.0, 0.0, 0.0});
}

TEST_CASE("noiseless AVSS over MTMC accumulates the asymmetric L1") {
  const McamGeometry g;
  std::mt19937_64 rng(4);
  for (const std::uint32_t cl : {1U, 3U, 8U, 13U}) {
    for (const std::size_t dim : {24UL, 50UL}) {
      std::vector<QuantizedVector> sq;
      std::vector<EncodedVector> sup;
      for (int s = 0; s < 6; ++s) {
        sq.push_back(random_qv(rng, dim, 3 * cl + 1));
        sup.push_back(encode(sq.back(), Scheme::MTMC, cl));
      }
      const auto plan = plan_search(SearchMode::AVSS, sup, g, 4);
      const auto q = random_qv(rng, dim, 4);
      const auto r = run_avss(q, plan, noiseless(), {}, exact());
      for (std::size_t s = 0; s < sup.size(); ++s) {
        CHECK(-r.support_scores[s] == static_cast<double>(oracle::asymmetric_l1(q, sq[s], cl)));
      }
    }
  }
}

TEST_CASE("downscaled support attains the maximal AVSS score") {
  const McamGeometry g;
  std::mt19937_64 rng(5);
  const std::uint32_t cl = 4;
  std::vector<QuantizedVector> sq;
  std::vector<EncodedVector> sup;
  for (int s = 0; s < 10; ++s) {
    sq.push_back(random_qv(rng, 48, 3 * cl + 1));
    sup.push_back(encode(sq.back(), Scheme::MTMC, cl));
  }
  QuantizedVector q;
  q.config.levels = 4;
  for (const auto m : sq[6].values) q.values.push_back((m + cl / 2) / cl);
  const auto plan = plan_search(SearchMode::AVSS, sup, g, 4);
  auto r = run_avss(q, plan, noiseless(), {}, exact());
  std::vector<int> labels(10);
  for (int i = 0; i < 10; ++i) labels[i] = i;
  CHECK(predict_class(r, labels) == oracle::nn_from_distances(
                                        [&] {
                                          std::vector<std::uint64_t> d;
                                          for (const auto& s : sq) d.push_back(oracle::asymmetric_l1(q, s, cl));
                                          return d;
                                        }(),
                                        labels));
  CHECK(r.support_votes[6] == 1.0);
}

TEST_CASE("AVSS and SVSS iteration counters") {
  const McamGeometry g;
  std::mt19937_64 rng(6);
  std::vector<EncodedVector> sup;
  for (int s = 0; s < 3; ++s) sup.push_back(encode(random_qv(rng, 48, 97), Scheme::MTMC, 32));
  const auto q4 = random_qv(rng, 48, 4);
  const auto a = run_avss(q4, plan_search(SearchMode::AVSS, sup, g, 4), noiseless(), {});
  const auto qf = random_qv(rng, 48, 97);
  const auto s = run_svss(encode(qf, Scheme::MTMC, 32), plan_search(SearchMode::SVSS, sup, g, 97),
                          noiseless(), {});
  CHECK(a.counters.iterations == 2);
  CHECK(s.counters.iterations == 64);
  CHECK(a.counters.strings_sensed == 3 * 64);
  CHECK(s.counters.energy_proxy / a.counters.energy_proxy == 32.0);
}

TEST_CASE("B4E SVSS with positional weights on exact mismatch") {
  // Weighted digit mismatch equals |a - b| exactly when all digit differences
  // share a sign, and exceeds it otherwise.
  const McamGeometry g;
  std::vector<EncodedVector> sup;
  for (std::uint32_t m = 0; m < 64; ++m) {
    QuantizedVector v;
    v.config.levels = 64;
    v.values = {m};
    sup.push_back(encode(v, Scheme::B4E, 3));
  }
  const auto plan = plan_search(SearchMode::SVSS, sup, g, 64);
  for (std::uint32_t a = 0; a < 64; ++a) {
    QuantizedVector q;
    q.config.levels = 64;
    q.values = {a};
    const auto r = run_svss(encode(q, Scheme::B4E, 3), plan, noiseless(), {}, exact());
    for (std::uint32_t b = 0; b < 64; ++b) {
      const double weighted = -r.support_scores[b];
      const double l1 = std::abs(static_cast<double>(a) - b);
      bool pos = false;
      bool neg = false;
      for (int k = 0; k < 3; ++k) {
        const int da = static_cast<int>(a >> (2 * k)) & 3;
        const int db = static_cast<int>(b >> (2 * k)) & 3;
        pos |= da > db;
        neg |= da < db;
      }
      REQUIRE(weighted >= l1);
      REQUIRE((weighted == l1) == !(pos && neg));
    }
  }
}

TEST_CASE("predict_class tie and aggregation rules") {
  EpisodeResult r;
  r.support_votes = {3, 0, 1, 0};
  r.support_scores = {0, 5, 0, 0};
  const std::vector<int> labels{7, 7, 2, 2};
  CHECK(predict_class(r, labels) == 7);
  CHECK(r.class_votes == std::vector<std::pair<int, double>>{{2, 1.0}, {7, 3.0}});
  r.support_votes = {1, 1, 2, 0};
  CHECK(predict_class(r, labels) == 2);
  CHECK(predict_class(r, labels, ClassAggregation::Scores) == 7);
  CHECK_THROWS_AS((void)predict_class(r, std::vector<int>{}), std::invalid_argument);
}

TEST_CASE("analog and vote modes under noise are reproducible") {
  const McamGeometry g;
  std::mt19937_64 rng(8);
  std::vector<EncodedVector> sup;
  for (int s = 0; s < 20; ++s) sup.push_back(encode(random_qv(rng, 30, 13), Scheme::MTMC, 4));
  const auto plan = plan_search(SearchMode::AVSS, sup, g, 4);
  const auto q = random_qv(rng, 30, 4);
  McamDeviceModel dev;
  dev.current.noise_sigma = 0.3;
  for (const auto acc : {Accumulation::Vote, Accumulation::Analog}) {
    SearchOptions o;
    o.accumulation = acc;
    const auto a = run_avss(q, plan, dev, {}, o);
    const auto b = run_avss(q, plan, dev, {}, o);
    CHECK(a.support_scores == b.support_scores);
    o.draw = 1;
    const auto c = run_avss(q, plan, dev, {}, o);
    if (acc == Accumulation::Analog) CHECK(c.support_scores != a.support_scores);
  }
}

TEST_CASE("scaling i0 leaves ideal-sense predictions unchanged") {
  const McamGeometry g;
  std::mt19937_64 rng(9);
  std::vector<EncodedVector> sup;
  for (int s = 0; s < 15; ++s) sup.push_back(encode(random_qv(rng, 48, 25), Scheme::MTMC, 8));
  const auto plan = plan_search(SearchMode::AVSS, sup, g, 4);
  std::vector<int> labels(15);
  for (int i = 0; i < 15; ++i) labels[i] = i / 3;
  McamDeviceModel dev;
  auto scaled = dev;
  scaled.current.i0 = 8.0;
  for (int t = 0; t < 20; ++t) {
    const auto q = random_qv(rng, 48, 4);
    SearchOptions o;
    o.draw = static_cast<std::uint64_t>(t);
    auto a = run_avss(q, plan, dev, {}, o);
    auto b = run_avss(q, plan, scaled, {}, o);
    CHECK(a.support_votes == b.support_votes);
    CHECK(predict_class(a, labels) == predict_class(b, labels));
  }
}
