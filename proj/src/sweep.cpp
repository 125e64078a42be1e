#include "mcam/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#include "mcam/noise.hpp"
#include "mcam/oracle.hpp"

namespace mcam {

namespace {

std::uint64_t absdiff(std::uint64_t a, std::uint64_t b) { return a > b ? a - b : b - a; }

LabeledTable load_table(const ExperimentConfig& cfg) {
  if (cfg.dataset.empty()) return make_synthetic(cfg.synthetic);
  return ingest_vectors(cfg.dataset, cfg.format);
}

// Runs `fn(i)` for i in [0, n) on up to `threads` workers.
template <typename Fn>
void parallel_for(std::size_t n, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1U, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, n));
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::atomic<bool> failed{false};
  std::mutex failure_mutex;
  std::vector<std::jthread> workers;
  for (unsigned t = 0; t < threads; ++t) {
    workers.emplace_back([&] {
      for (std::size_t i = next++; i < n && !failed; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          failed = true;
        }
      }
    });
  }
  workers.clear();
  if (failure) std::rethrow_exception(failure);
}

}  // namespace

std::uint64_t episode_seed(std::uint64_t seed, std::size_t episode_index) {
  return noise::hash_key(seed, episode_index, 0xe915, 0);
}

void ExperimentConfig::validate() const {
  if (n_way == 0 || k_shot == 0 || query_per_class == 0) {
    throw ConfigError("n_way, k_shot and query_per_class must be >= 1");
  }
  if (schemes.empty() || cls.empty()) throw ConfigError("sweep needs at least one scheme and one cl");
  if (episodes == 0) throw ConfigError("episodes must be >= 1");
  for (const auto scheme : schemes) {
    for (const auto cl : cls) {
      if (cl == 0) throw ConfigError("cl must be >= 1");
      (void)default_levels(scheme, cl);  // rejects invalid B4WE lengths and overflow
    }
  }
  device.validate();
  sense.validate();
  QuantConfig probe = clip;
  probe.levels = 4;
  probe.validate();
}

const std::set<std::string, std::less<>>& experiment_config_keys() {
  static const std::set<std::string, std::less<>> keys = [] {
    std::set<std::string, std::less<>> k{
        "dataset",          "format",           "synthetic_classes", "synthetic_per_class",
        "synthetic_dim",    "synthetic_separation", "synthetic_spread", "synthetic_seed",
        "n_way",            "k_shot",           "query_per_class",   "schemes",
        "cls",              "mode",             "accumulation",      "aggregation",
        "noise",            "clip_sigma",       "signed",            "episodes",
        "episode_seed",     "unit_cost",        "threads",           "output",
        "plan_only"};
    k.insert(device_config_keys().begin(), device_config_keys().end());
    return k;
  }();
  return keys;
}

void apply_experiment_config(const KeyValueConfig& kv, ExperimentConfig& cfg) {
  kv.require_known(experiment_config_keys());
  auto size = [&](std::string_view key, std::size_t& field) {
    if (const auto v = kv.get_int(key)) {
      if (*v < 0) throw ConfigError(std::string(key) + " must be >= 0");
      field = static_cast<std::size_t>(*v);
    }
  };
  if (const auto v = kv.get_string("dataset")) cfg.dataset = *v;
  if (const auto v = kv.get_string("format")) cfg.format = parse_vector_format(*v);
  size("synthetic_classes", cfg.synthetic.classes);
  size("synthetic_per_class", cfg.synthetic.per_class);
  size("synthetic_dim", cfg.synthetic.dim);
  if (const auto v = kv.get_double("synthetic_separation")) cfg.synthetic.separation = *v;
  if (const auto v = kv.get_double("synthetic_spread")) cfg.synthetic.spread = *v;
  if (const auto v = kv.get_int("synthetic_seed")) cfg.synthetic.seed = static_cast<std::uint64_t>(*v);
  size("n_way", cfg.n_way);
  size("k_shot", cfg.k_shot);
  size("query_per_class", cfg.query_per_class);
  if (const auto v = kv.get_strings("schemes")) {
    cfg.schemes.clear();
    for (const auto& s : *v) cfg.schemes.push_back(parse_scheme(s));
  }
  if (const auto v = kv.get_ints("cls")) {
    cfg.cls.clear();
    for (const auto c : *v) {
      if (c <= 0 || c > 4096) throw ConfigError("cl values must be in 1..4096");
      cfg.cls.push_back(static_cast<std::uint32_t>(c));
    }
  }
  if (const auto v = kv.get_string("mode")) cfg.mode = parse_search_mode(*v);
  if (const auto v = kv.get_string("accumulation")) cfg.accumulation = parse_accumulation(*v);
  if (const auto v = kv.get_string("aggregation")) {
    if (*v == "votes") {
      cfg.aggregation = ClassAggregation::Votes;
    } else if (*v == "scores") {
      cfg.aggregation = ClassAggregation::Scores;
    } else {
      throw ConfigError("aggregation must be 'votes' or 'scores'");
    }
  }
  if (const auto v = kv.get_bool("noise")) cfg.noise = *v;
  if (const auto v = kv.get_double("clip_sigma")) cfg.clip.clip_sigma = *v;
  if (const auto v = kv.get_bool("signed")) cfg.clip.signed_mode = *v;
  size("episodes", cfg.episodes);
  if (const auto v = kv.get_int("episode_seed")) cfg.seed = static_cast<std::uint64_t>(*v);
  if (const auto v = kv.get_double("unit_cost")) cfg.unit_cost = *v;
  if (const auto v = kv.get_int("threads")) cfg.threads = static_cast<unsigned>(std::max<std::int64_t>(0, *v));
  if (const auto v = kv.get_string("output")) cfg.output = *v;
  if (const auto v = kv.get_bool("plan_only")) cfg.plan_only = *v;
  apply_device_config(kv, cfg.device, cfg.sense);
}

EpisodeOutcome evaluate_episode(const LabeledTable& table, const Episode& episode, Scheme scheme,
                                std::uint32_t cl, const ExperimentConfig& cfg,
                                const FeatureStats& stats, std::size_t episode_index) {
  const std::uint32_t support_levels = default_levels(scheme, cl);
  QuantConfig support_cfg = cfg.clip;
  support_cfg.levels = support_levels;
  QuantConfig query_cfg = cfg.clip;
  query_cfg.levels = cfg.mode == SearchMode::AVSS ? 4 : support_levels;

  std::vector<QuantizedVector> support_q;
  std::vector<EncodedVector> support_e;
  for (const auto row : episode.support_rows) {
    support_q.push_back(quantize(table.row(row), support_cfg, stats.mean, stats.std));
    support_e.push_back(encode(support_q.back(), scheme, cl));
  }
  const auto plan = plan_search(cfg.mode, support_e, cfg.device.geometry, query_cfg.levels);

  McamDeviceModel device = cfg.device;
  device.current.seed = noise::hash_key(cfg.device.current.seed, episode_index, 0xde71ce, 0);
  SearchOptions options;
  options.accumulation = cfg.accumulation;
  options.noise = cfg.noise;
  options.unit_cost = cfg.unit_cost;

  EpisodeOutcome out;
  std::size_t correct = 0;
  std::size_t oracle_correct = 0;
  std::vector<std::uint64_t> distances(support_q.size());
  for (std::size_t qi = 0; qi < episode.query_rows.size(); ++qi) {
    const auto q = quantize(table.row(episode.query_rows[qi]), query_cfg, stats.mean, stats.std);
    options.draw = qi;
    auto result = cfg.mode == SearchMode::AVSS
                      ? run_avss(q, plan, device, cfg.sense, options)
                      : run_svss(encode(q, scheme, cl), plan, device, cfg.sense, options);
    const int predicted = predict_class(result, episode.support_labels, cfg.aggregation);

    for (std::size_t s = 0; s < support_q.size(); ++s) {
      if (cfg.mode == SearchMode::AVSS) {
        // Lift q in 0..3 onto the 0..L-1 support grid; scaled by 3 to stay integral.
        std::uint64_t d = 0;
        for (std::size_t i = 0; i < q.dim(); ++i) {
          d += absdiff(std::uint64_t{q.values[i]} * (support_levels - 1),
                       std::uint64_t{3} * support_q[s].values[i]);
        }
        distances[s] = d;
      } else {
        distances[s] = oracle::l1_distance(q, support_q[s]);
      }
    }
    const int oracle_label = oracle::nn_from_distances(distances, episode.support_labels);

    const int truth = episode.query_labels[qi];
    correct += predicted == truth;
    oracle_correct += oracle_label == truth;
    out.counters = result.counters;
    out.queries.push_back({episode.query_rows[qi], truth, predicted, oracle_label, result.class_votes});
  }
  const auto n = static_cast<double>(episode.query_rows.size());
  out.accuracy = static_cast<double>(correct) / n;
  out.oracle_accuracy = static_cast<double>(oracle_correct) / n;
  return out;
}

MeanCi mean_ci95(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  double sum = 0.0;
  for (const double x : xs) sum += x;
  const double mean = sum / static_cast<double>(xs.size());
  if (xs.size() < 2) return {mean, 0.0};
  double sq = 0.0;
  for (const double x : xs) sq += (x - mean) * (x - mean);
  const double sd = std::sqrt(sq / static_cast<double>(xs.size() - 1));
  return {mean, 1.96 * sd / std::sqrt(static_cast<double>(xs.size()))};
}

SweepReport run_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_sweep(cfg, load_table(cfg));
}

SweepReport run_sweep(const ExperimentConfig& cfg, const LabeledTable& table) {
  cfg.validate();
  const std::size_t supports = cfg.n_way * cfg.k_shot;

  SweepReport report;
  for (const auto scheme : cfg.schemes) {
    for (const auto cl : cfg.cls) {
      const auto shape = search_shape(cfg.mode, scheme, table.dim, cl, cfg.device.geometry);
      const std::size_t strings = supports * shape.strings_per_support;
      if (strings > cfg.device.geometry.strings_per_block) {
        throw CapacityError(strings, cfg.device.geometry.strings_per_block);
      }
      SweepRow row;
      row.scheme = scheme;
      row.cl = cl;
      row.support_levels = default_levels(scheme, cl);
      row.mode = cfg.mode;
      row.iterations = shape.iterations;
      row.strings = strings;
      row.energy_proxy = static_cast<double>(shape.iterations) * static_cast<double>(strings) * cfg.unit_cost;
      report.rows.push_back(row);
    }
  }
  if (cfg.plan_only) return report;

  const auto stats = feature_stats(table);
  std::vector<Episode> episodes;
  episodes.reserve(cfg.episodes);
  for (std::size_t e = 0; e < cfg.episodes; ++e) {
    episodes.push_back(
        sample_episode(table, cfg.n_way, cfg.k_shot, cfg.query_per_class, episode_seed(cfg.seed, e)));
  }

  for (auto& row : report.rows) {
    std::vector<double> acc(cfg.episodes);
    std::vector<double> oracle_acc(cfg.episodes);
    try {
      parallel_for(cfg.episodes, cfg.threads, [&](std::size_t e) {
        const auto outcome = evaluate_episode(table, episodes[e], row.scheme, row.cl, cfg, stats, e);
        acc[e] = outcome.accuracy;
        oracle_acc[e] = outcome.oracle_accuracy;
      });
    } catch (const Error& err) {
      throw DataError("sweep point " + std::string(to_string(row.scheme)) + " cl=" +
                      std::to_string(row.cl) + " failed: " + err.what());
    }
    const auto ci = mean_ci95(acc);
    row.accuracy_mean = ci.mean;
    row.accuracy_ci95 = ci.half_width;
    row.oracle_accuracy_mean = mean_ci95(oracle_acc).mean;
    row.episode_accuracy = std::move(acc);
  }
  return report;
}

void write_csv(std::ostream& out, const SweepReport& report) {
  out << "scheme,cl,support_levels,mode,iterations,strings,energy_proxy,accuracy_mean,"
         "accuracy_ci95,oracle_accuracy,episodes\n";
  for (const auto& r : report.rows) {
    out << to_string(r.scheme) << ',' << r.cl << ',' << r.support_levels << ',' << to_string(r.mode)
        << ',' << r.iterations << ',' << r.strings << ',' << r.energy_proxy << ',' << r.accuracy_mean
        << ',' << r.accuracy_ci95 << ',' << r.oracle_accuracy_mean << ',' << r.episode_accuracy.size()
        << '\n';
  }
}

nlohmann::json to_json(const SweepReport& report) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : report.rows) {
    rows.push_back({{"scheme", to_string(r.scheme)},
                    {"cl", r.cl},
                    {"support_levels", r.support_levels},
                    {"mode", to_string(r.mode)},
                    {"iterations", r.iterations},
                    {"strings", r.strings},
                    {"energy_proxy", r.energy_proxy},
                    {"accuracy_mean", r.accuracy_mean},
                    {"accuracy_ci95", r.accuracy_ci95},
                    {"oracle_accuracy", r.oracle_accuracy_mean},
                    {"episode_accuracy", r.episode_accuracy}});
  }
  return {{"rows", rows}};
}

void write_report(const SweepReport& report, const std::filesystem::path& prefix) {
  auto csv_path = prefix;
  csv_path += ".csv";
  auto json_path = prefix;
  json_path += ".json";
  std::ofstream csv(csv_path);
  std::ofstream json(json_path);
  if (!csv || !json) throw DataError("cannot write report files with prefix " + prefix.string());
  write_csv(csv, report);
  json << to_json(report).dump(2) << '\n';
}

}  // namespace mcam
