#include "mcam/dataset.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>
#include <string>

namespace mcam {

namespace {

constexpr std::array<char, 4> kMagic{'M', 'C', 'V', 'F'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "binary vector files assume little-endian");

template <typename T>
void write_pod(std::ostream& out, T v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
bool read_pod(std::istream& in, T& v) {
  return static_cast<bool>(in.read(reinterpret_cast<char*>(&v), sizeof(T)));
}

VectorFormat resolve(const std::filesystem::path& path, VectorFormat format) {
  if (format != VectorFormat::Auto) return format;
  const auto ext = path.extension().string();
  if (ext == ".mcv" || ext == ".bin") return VectorFormat::Binary;
  if (ext == ".csv") return VectorFormat::Csv;
  throw UnknownFormatError("cannot infer vector file format from extension '" + ext + "' of " +
                           path.string());
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? comma : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

bool parse_int(std::string_view s, int& v) {
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  return ec == std::errc() && ptr == s.data() + s.size();
}

LabeledTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UnreadableFileError("cannot open vector file " + path.string());
  LabeledTable table;
  std::string line;
  std::size_t lineno = 0;
  std::size_t row = 0;
  bool first = true;
  while (std::getline(in, line)) {
    ++lineno;
    const auto view = trim(line);
    if (view.empty()) continue;
    const auto fields = split_fields(view);
    int label = 0;
    if (!parse_int(fields[0], label)) {
      if (first) {
        first = false;
        continue;
      }
      throw MalformedDataError(path.string() + ":" + std::to_string(lineno) + ": bad label '" +
                               std::string(fields[0]) + "'");
    }
    first = false;
    const std::size_t d = fields.size() - 1;
    if (row == 0) {
      if (d == 0) throw MalformedDataError(path.string() + ": rows have no values");
      table.dim = d;
    } else if (d != table.dim) {
      throw RaggedDimensionError(row, table.dim, d);
    }
    std::vector<double> values(d);
    for (std::size_t k = 0; k < d; ++k) {
      const std::string text(fields[k + 1]);
      char* end = nullptr;
      values[k] = std::strtod(text.c_str(), &end);
      if (text.empty() || end != text.c_str() + text.size() || !std::isfinite(values[k])) {
        throw MalformedDataError(path.string() + ":" + std::to_string(lineno) + ": bad value '" +
                                 text + "'");
      }
    }
    table.push_back(label, values);
    ++row;
  }
  if (in.bad()) throw UnreadableFileError("read error on " + path.string());
  return table;
}

LabeledTable read_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UnreadableFileError("cannot open vector file " + path.string());
  std::array<char, 4> magic{};
  std::uint32_t version = 0;
  std::uint32_t dim = 0;
  std::uint64_t count = 0;
  if (!in.read(magic.data(), magic.size()) || magic != kMagic) {
    throw UnknownFormatError(path.string() + " is not a binary vector file (bad magic)");
  }
  if (!read_pod(in, version) || version != kVersion) {
    throw UnknownFormatError(path.string() + ": unsupported binary vector file version");
  }
  if (!read_pod(in, dim) || !read_pod(in, count) || dim == 0) {
    throw MalformedDataError(path.string() + ": truncated or invalid header");
  }
  LabeledTable table;
  table.dim = dim;
  std::vector<float> raw(dim);
  std::vector<double> values(dim);
  for (std::uint64_t r = 0; r < count; ++r) {
    std::int32_t label = 0;
    if (!in.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(dim * sizeof(float))) ||
        !read_pod(in, label)) {
      throw MalformedDataError(path.string() + ": truncated at row " + std::to_string(r) + " of " +
                               std::to_string(count));
    }
    std::copy(raw.begin(), raw.end(), values.begin());
    table.push_back(label, values);
  }
  return table;
}

}  // namespace

RaggedDimensionError::RaggedDimensionError(std::size_t row, std::size_t expected, std::size_t got)
    : DataError("ragged vector table: row " + std::to_string(row) + " has " + std::to_string(got) +
                " values, expected " + std::to_string(expected)),
      row_(row) {}

VectorFormat parse_vector_format(std::string_view name) {
  if (name == "auto") return VectorFormat::Auto;
  if (name == "bin" || name == "binary" || name == "mcv") return VectorFormat::Binary;
  if (name == "csv") return VectorFormat::Csv;
  throw UnknownFormatError("unknown vector format '" + std::string(name) + "'");
}

void LabeledTable::push_back(int label, std::span<const double> v) {
  if (labels.empty() && dim == 0) dim = v.size();
  if (v.size() != dim) throw RaggedDimensionError(labels.size(), dim, v.size());
  labels.push_back(label);
  values.insert(values.end(), v.begin(), v.end());
}

LabeledTable ingest_vectors(const std::filesystem::path& path, VectorFormat format) {
  const auto fmt = resolve(path, format);
  if (!std::filesystem::exists(path)) throw UnreadableFileError("no such file: " + path.string());
  return fmt == VectorFormat::Binary ? read_binary(path) : read_csv(path);
}

void export_vectors(const LabeledTable& table, const std::filesystem::path& path, VectorFormat format) {
  const auto fmt = resolve(path, format);
  if (fmt == VectorFormat::Binary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw UnreadableFileError("cannot write " + path.string());
    out.write(kMagic.data(), kMagic.size());
    write_pod(out, kVersion);
    write_pod(out, static_cast<std::uint32_t>(table.dim));
    write_pod(out, static_cast<std::uint64_t>(table.size()));
    for (std::size_t r = 0; r < table.size(); ++r) {
      for (const double v : table.row(r)) write_pod(out, static_cast<float>(v));
      write_pod(out, static_cast<std::int32_t>(table.labels[r]));
    }
    if (!out) throw UnreadableFileError("write error on " + path.string());
    return;
  }
  std::ofstream out(path);
  if (!out) throw UnreadableFileError("cannot write " + path.string());
  out.precision(std::numeric_limits<double>::max_digits10);
  for (std::size_t r = 0; r < table.size(); ++r) {
    out << table.labels[r];
    for (const double v : table.row(r)) out << ',' << v;
    out << '\n';
  }
  if (!out) throw UnreadableFileError("write error on " + path.string());
}

FeatureStats feature_stats(const LabeledTable& table) {
  if (table.values.empty()) throw DataError("feature_stats: empty table");
  double sum = 0.0;
  for (const double v : table.values) sum += v;
  const double mean = sum / static_cast<double>(table.values.size());
  double sq = 0.0;
  for (const double v : table.values) sq += (v - mean) * (v - mean);
  const double std = std::sqrt(sq / static_cast<double>(table.values.size()));
  return {mean, std > 0.0 ? std : 1.0};
}

LabeledTable make_synthetic(const SyntheticSpec& spec) {
  if (spec.classes == 0 || spec.per_class == 0 || spec.dim == 0) {
    throw ConfigError("synthetic dataset needs classes, per_class and dim >= 1");
  }
  if (!(spec.separation > 0.0) || !(spec.spread >= 0.0)) {
    throw ConfigError("synthetic dataset needs separation > 0 and spread >= 0");
  }
  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> uniform(0.0, spec.separation);
  std::normal_distribution<double> normal(0.0, 1.0);
  LabeledTable table;
  table.dim = spec.dim;
  std::vector<double> center(spec.dim);
  std::vector<double> sample(spec.dim);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    for (auto& v : center) v = uniform(rng);
    for (std::size_t n = 0; n < spec.per_class; ++n) {
      for (std::size_t k = 0; k < spec.dim; ++k) {
        sample[k] = std::max(0.0, center[k] + spec.spread * normal(rng));
      }
      table.push_back(static_cast<int>(c), sample);
    }
  }
  return table;
}

}  // namespace mcam
