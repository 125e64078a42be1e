// mcamsim: command-line front end for the MCAM simulator.
//
// Exit codes: 0 success, 1 gradcheck failure or internal error,
// 2 configuration error, 3 capacity error, 4 data error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "mcam/hat.hpp"
#include "mcam/oracle.hpp"
#include "mcam/sweep.hpp"

namespace {

using namespace mcam;

struct KeyHelp {
  const char* key;
  const char* help;
};

// Every experiment/device key with its documented default. The same names
// are accepted in --config files (with '_' or '-').
constexpr KeyHelp kExperimentKeys[] = {
    {"dataset", "labeled vector file (.csv or .mcv); empty = synthetic data"},
    {"format", "auto|csv|binary (default auto)"},
    {"synthetic_classes", "synthetic classes (default 50)"},
    {"synthetic_per_class", "synthetic rows per class (default 20)"},
    {"synthetic_dim", "synthetic dimension d (default 48)"},
    {"synthetic_separation", "synthetic class-center range (default 1.0)"},
    {"synthetic_spread", "synthetic per-component std (default 0.3)"},
    {"synthetic_seed", "synthetic generator seed (default 1)"},
    {"n_way", "classes per episode (default 20)"},
    {"k_shot", "supports per class (default 5)"},
    {"query_per_class", "queries per class (default 5)"},
    {"schemes", "comma list of sre,b4e,b4we,mtmc (default mtmc)"},
    {"cls", "comma list of code word lengths (default 1,2,4,8)"},
    {"mode", "avss|svss (default avss)"},
    {"accumulation", "vote|analog|exact (default vote)"},
    {"aggregation", "votes|scores (default votes)"},
    {"noise", "enable current noise (default true)"},
    {"clip_sigma", "clip range in standard deviations (default 3)"},
    {"signed", "clip to mean +- c*std instead of [0, c*std] (default false)"},
    {"episodes", "episodes per sweep point (default 30)"},
    {"episode_seed", "episode sampling seed (default 1)"},
    {"unit_cost", "energy per string-iteration (default 1)"},
    {"threads", "worker threads, 0 = all cores (default 0)"},
    {"output", "output prefix for <prefix>.csv and <prefix>.json"},
    {"cells_per_string", "cells per NAND string (default 24)"},
    {"strings_per_block", "strings per block (default 131072)"},
    {"i0", "zero-mismatch string current (default 1)"},
    {"alpha", "current decay per mismatch level (default 0.1)"},
    {"gain", "bottleneck gains for max mismatch 0..3 (default 1,0.85,0.5,0.2)"},
    {"noise_sigma", "lognormal current noise sigma (default 0.05)"},
    {"seed", "device noise seed (default 24301)"},
    {"sense_mode", "ideal|threshold|percentile (default ideal)"},
    {"sense_threshold", "fixed SA threshold in current units (default 0.5)"},
    {"sense_percentile", "fraction of strings voting in percentile mode (default 0.1)"},
};

std::string flag_name(std::string key) {
  std::replace(key.begin(), key.end(), '_', '-');
  return "--" + key;
}

// Collects experiment flags as raw strings so they can be layered over a
// config file: file values first, then whatever was given on the command line.
struct ExperimentFlags {
  std::string config_path;
  std::map<std::string, std::string> values;
  bool plan_only = false;

  void attach(CLI::App& app) {
    app.add_option("--config", config_path, "key = value file; command-line flags take precedence")
        ->check(CLI::ExistingFile);
    for (const auto& k : kExperimentKeys) app.add_option(flag_name(k.key), values[k.key], k.help);
  }

  [[nodiscard]] ExperimentConfig build(const CLI::App& app) const {
    KeyValueConfig kv;
    if (!config_path.empty()) kv = KeyValueConfig::from_file(config_path);
    for (const auto& k : kExperimentKeys) {
      if (app.count(flag_name(k.key)) > 0) kv.set(k.key, values.at(k.key));
    }
    if (plan_only) kv.set("plan_only", "true");
    ExperimentConfig cfg;
    apply_experiment_config(kv, cfg);
    cfg.validate();
    return cfg;
  }
};

std::ostream& open_output(const std::string& path, std::ofstream& file) {
  if (path.empty() || path == "-") return std::cout;
  file.open(path);
  if (!file) throw DataError("cannot open output file " + path);
  return file;
}

// ---------------------------------------------------------------- encode

struct EncodeArgs {
  std::string input;
  std::string format = "auto";
  std::string scheme = "mtmc";
  std::uint32_t cl = 8;
  std::uint32_t levels = 0;
  double clip_sigma = 3.0;
  bool signed_mode = false;
  std::string output;
};

int run_encode(const EncodeArgs& a) {
  const auto scheme = parse_scheme(a.scheme);
  QuantConfig q;
  q.levels = a.levels == 0 ? default_levels(scheme, a.cl) : a.levels;
  q.clip_sigma = a.clip_sigma;
  q.signed_mode = a.signed_mode;
  q.validate();
  if (q.levels > scheme_capacity(scheme, a.cl)) {
    throw ConfigError(std::to_string(q.levels) + " levels exceed the capacity of " + a.scheme +
                      " at cl=" + std::to_string(a.cl));
  }
  const auto table = ingest_vectors(a.input, parse_vector_format(a.format));
  const auto stats = feature_stats(table);
  std::ofstream file;
  auto& out = open_output(a.output, file);
  out << "# scheme=" << to_string(scheme) << " cl=" << a.cl << " levels=" << q.levels
      << " mean=" << stats.mean << " std=" << stats.std << '\n';
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto e = encode(quantize(table.row(r), q, stats.mean, stats.std), scheme, a.cl);
    out << table.labels[r];
    for (std::size_t i = 0; i < e.dim(); ++i) {
      out << ',';
      for (const auto w : e.dimension(i)) out << static_cast<int>(w.level());
    }
    out << '\n';
  }
  return 0;
}

// ------------------------------------------------------ analyze-mismatch

struct AnalyzeArgs {
  std::string scheme = "mtmc";
  std::uint32_t cl = 8;
  std::uint32_t levels = 0;
  std::string output;
};

int run_analyze(const AnalyzeArgs& a) {
  const auto scheme = parse_scheme(a.scheme);
  if (a.cl == 0) throw ConfigError("cl must be >= 1");
  const auto cap = scheme_capacity(scheme, a.cl);
  const auto levels = a.levels == 0 ? static_cast<std::uint32_t>(std::min<std::uint64_t>(cap, 4096)) : a.levels;
  if (levels < 2 || levels > cap) {
    throw ConfigError("levels must be in 2.." + std::to_string(cap) + " for " + a.scheme + " at cl=" +
                      std::to_string(a.cl));
  }
  const auto stats = oracle::mismatch_distribution(scheme, a.cl, levels);
  std::ofstream file;
  oracle::write_csv(open_output(a.output, file), stats);
  std::cerr << "pairs=" << stats.pair_count() << " mismatch3_fraction=" << stats.overall_fraction(3) << '\n';
  return 0;
}

// -------------------------------------------------------------- simulate

int run_simulate(const ExperimentConfig& cfg, std::size_t episode_index) {
  const auto scheme = cfg.schemes.front();
  const auto cl = cfg.cls.front();
  const auto table = cfg.dataset.empty() ? make_synthetic(cfg.synthetic) : ingest_vectors(cfg.dataset, cfg.format);
  const auto shape = search_shape(cfg.mode, scheme, table.dim, cl, cfg.device.geometry);
  const auto strings = cfg.n_way * cfg.k_shot * shape.strings_per_support;
  if (strings > cfg.device.geometry.strings_per_block) {
    throw CapacityError(strings, cfg.device.geometry.strings_per_block);
  }
  const auto episode = sample_episode(table, cfg.n_way, cfg.k_shot, cfg.query_per_class,
                                      episode_seed(cfg.seed, episode_index));
  const auto outcome = evaluate_episode(table, episode, scheme, cl, cfg, feature_stats(table), episode_index);

  std::cout << "# scheme=" << to_string(scheme) << " cl=" << cl << " mode=" << to_string(cfg.mode)
            << " accumulation=" << to_string(cfg.accumulation) << " d=" << table.dim
            << " supports=" << episode.support_rows.size() << '\n';
  std::cout << "# iterations=" << outcome.counters.iterations
            << " strings_sensed=" << outcome.counters.strings_sensed
            << " energy_proxy=" << outcome.counters.energy_proxy << '\n';
  std::cout << "query,row,label,predicted,oracle,top_classes\n";
  for (std::size_t i = 0; i < outcome.queries.size(); ++i) {
    const auto& q = outcome.queries[i];
    auto votes = q.class_votes;
    std::stable_sort(votes.begin(), votes.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
    std::cout << i << ',' << q.row << ',' << q.label << ',' << q.predicted << ',' << q.oracle << ',';
    for (std::size_t k = 0; k < std::min<std::size_t>(3, votes.size()); ++k) {
      std::cout << (k ? " " : "") << votes[k].first << ':' << votes[k].second;
    }
    std::cout << '\n';
  }
  std::cout << "# accuracy=" << outcome.accuracy << " oracle_accuracy=" << outcome.oracle_accuracy << '\n';
  return 0;
}

// ----------------------------------------------------------------- sweep

int run_sweep_cmd(const ExperimentConfig& cfg) {
  const auto report = run_sweep(cfg);
  if (!cfg.output.empty()) {
    write_report(report, cfg.output);
    std::cerr << "wrote " << cfg.output.string() << ".csv and .json\n";
  }
  write_csv(std::cout, report);
  return 0;
}

// ------------------------------------------------------------- gradcheck

struct GradArgs {
  std::uint32_t cl = 8;
  double sharpness = 10.0;
  std::size_t points = 1000;
  std::uint64_t seed = 1;
};

int run_gradcheck(const GradArgs& a) {
  hat::SurrogateConfig cfg;
  cfg.cl = a.cl;
  cfg.sa_sharpness = a.sharpness;
  cfg.validate();
  if (a.points < 2) throw ConfigError("gradcheck needs at least 2 points");
  bool ok = true;
  auto report = [&](const char* name, double err, double tol) {
    const bool pass = err <= tol;
    ok &= pass;
    std::cout << std::left << std::setw(22) << name << " max_err=" << std::setprecision(3) << err
              << " tol=" << tol << (pass ? "  PASS" : "  FAIL") << '\n';
  };

  double sa_err = 0.0;
  const double span = 8.0 / a.sharpness;
  for (std::size_t i = 0; i < a.points; ++i) {
    const double x = cfg.sa_threshold - span + 2.0 * span * static_cast<double>(i) / (a.points - 1);
    const double h = 1e-5 / a.sharpness;
    const double fd = (hat::sa_reference(x + h, cfg) - hat::sa_reference(x - h, cfg)) / (2 * h);
    const double g = hat::sa_forward_backward(x, cfg).grad;
    sa_err = std::max(sa_err, std::abs(g - fd) / std::max(std::abs(fd), 1e-12));
  }
  report("sa_sigmoid_backward", sa_err, 1e-5);

  // all words share one slope, so the aggregate is cl * slope
  const double word_slope = hat::mtmc_word_forward_backward(0.0, 1, cfg).grad;
  double slope_err = std::abs(cfg.cl * word_slope - 1.0);
  for (std::uint32_t v = 0; v <= 3 * cfg.cl; ++v) {
    double sum = 0.0;
    for (std::uint32_t j = 1; j <= cfg.cl; ++j) {
      const auto w = hat::mtmc_word_forward_backward(v, j, cfg);
      slope_err = std::max(slope_err, std::abs(w.grad - word_slope));
      sum += w.value;
    }
    slope_err = std::max(slope_err, std::abs(sum - v));
  }
  report("mtmc_ste_slope", slope_err, 0.0);

  hat::SurrogateConfig mcfg = cfg;
  mcfg.sa_sharpness = 0.3;
  mcfg.sa_threshold = -4.0 * cfg.cl;
  std::mt19937_64 rng(a.seed);
  std::uniform_real_distribution<double> uq(0.0, 3.0), us(0.0, 3.0 * cfg.cl);
  double match_err = 0.0;
  for (int t = 0; t < 20; ++t) {
    std::vector<double> q(8), s(8);
    for (auto& v : q) v = uq(rng);
    for (auto& v : s) v = us(rng);
    const auto m = hat::simulated_match(q, s, mcfg);
    for (std::size_t i = 0; i < q.size(); ++i) {
      const double h = 1e-5;
      auto qp = q, qm = q;
      qp[i] += h;
      qm[i] -= h;
      const double fd = (hat::smooth_match(qp, s, mcfg) - hat::smooth_match(qm, s, mcfg)) / (2 * h);
      match_err = std::max(match_err, std::abs(m.d_query[i] - fd) / std::max(std::abs(fd), 1e-9));
    }
  }
  report("simulated_match_query", match_err, 1e-4);

  const auto step = hat::demo_descent_step(a.seed);
  const bool descended = step.loss_after < step.loss_before;
  ok &= descended;
  std::cout << std::left << std::setw(22) << "demo_descent_step" << " loss " << step.loss_before << " -> "
            << step.loss_after << (descended ? "  PASS" : "  FAIL") << '\n';
  return ok ? 0 : 1;
}

// -------------------------------------------------------------- generate

int run_generate(const SyntheticSpec& spec, const std::string& output, const std::string& format) {
  if (output.empty()) throw ConfigError("generate needs --output");
  export_vectors(make_synthetic(spec), output, parse_vector_format(format));
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Behavioral NAND-flash MCAM simulator"};
  app.require_subcommand(1);

  EncodeArgs enc;
  auto* encode_cmd = app.add_subcommand("encode", "quantize and encode a vector file");
  encode_cmd->add_option("--input", enc.input, "labeled vector file")->required();
  encode_cmd->add_option("--format", enc.format, "auto|csv|binary")->capture_default_str();
  encode_cmd->add_option("--scheme", enc.scheme, "sre|b4e|b4we|mtmc")->capture_default_str();
  encode_cmd->add_option("--cl", enc.cl, "code word length (B4WE: total length)")->capture_default_str();
  encode_cmd->add_option("--levels", enc.levels, "quantization levels, 0 = scheme default")->capture_default_str();
  encode_cmd->add_option("--clip-sigma", enc.clip_sigma, "clip range in std units")->capture_default_str();
  encode_cmd->add_flag("--signed", enc.signed_mode, "clip symmetrically around the mean");
  encode_cmd->add_option("--output", enc.output, "output file (default stdout)");

  AnalyzeArgs an;
  auto* analyze_cmd = app.add_subcommand("analyze-mismatch", "exhaustive max-mismatch statistics as CSV");
  analyze_cmd->add_option("--scheme", an.scheme, "sre|b4e|b4we|mtmc")->capture_default_str();
  analyze_cmd->add_option("--cl", an.cl, "code word length")->capture_default_str();
  analyze_cmd->add_option("--levels", an.levels, "value range, 0 = scheme capacity (max 4096)")
      ->capture_default_str();
  analyze_cmd->add_option("--output", an.output, "output file (default stdout)");

  ExperimentFlags sim_flags;
  std::size_t episode_index = 0;
  auto* simulate_cmd = app.add_subcommand("simulate", "run one episode and print a per-query trace");
  sim_flags.attach(*simulate_cmd);
  simulate_cmd->add_option("--episode", episode_index, "episode index")->capture_default_str();

  ExperimentFlags sweep_flags;
  auto* sweep_cmd = app.add_subcommand("sweep", "energy/accuracy sweep over schemes and code word lengths");
  sweep_flags.attach(*sweep_cmd);
  sweep_cmd->add_flag("--plan-only", sweep_flags.plan_only, "report iterations/strings without running episodes");

  GradArgs ga;
  auto* grad_cmd = app.add_subcommand("gradcheck", "validate surrogate gradients by finite differences");
  grad_cmd->add_option("--cl", ga.cl, "code word length")->capture_default_str();
  grad_cmd->add_option("--sharpness", ga.sharpness, "SA sigmoid sharpness")->capture_default_str();
  grad_cmd->add_option("--points", ga.points, "grid points for the SA check")->capture_default_str();
  grad_cmd->add_option("--seed", ga.seed, "random seed")->capture_default_str();

  SyntheticSpec gen;
  std::string gen_output;
  std::string gen_format = "auto";
  auto* gen_cmd = app.add_subcommand("generate", "write a synthetic Gaussian-cluster dataset");
  gen_cmd->add_option("--classes", gen.classes, "classes")->capture_default_str();
  gen_cmd->add_option("--per-class", gen.per_class, "rows per class")->capture_default_str();
  gen_cmd->add_option("--dim", gen.dim, "dimension")->capture_default_str();
  gen_cmd->add_option("--separation", gen.separation, "class-center range")->capture_default_str();
  gen_cmd->add_option("--spread", gen.spread, "per-component std")->capture_default_str();
  gen_cmd->add_option("--seed", gen.seed, "seed")->capture_default_str();
  gen_cmd->add_option("--output", gen_output, "output file (.csv or .mcv)");
  gen_cmd->add_option("--format", gen_format, "auto|csv|binary")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*encode_cmd) return run_encode(enc);
    if (*analyze_cmd) return run_analyze(an);
    if (*simulate_cmd) return run_simulate(sim_flags.build(*simulate_cmd), episode_index);
    if (*sweep_cmd) return run_sweep_cmd(sweep_flags.build(*sweep_cmd));
    if (*grad_cmd) return run_gradcheck(ga);
    if (*gen_cmd) return run_generate(gen, gen_output, gen_format);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const CapacityError& e) {
    std::cerr << "capacity error: " << e.what() << '\n';
    return 3;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
