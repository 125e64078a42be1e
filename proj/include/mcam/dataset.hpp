#pragma once

// Labeled feature-vector tables and their on-disk formats.
//
// Binary (.mcv), little-endian:
//   char[4]  magic "MCVF"
//   uint32   version (1)
//   uint32   dimension d
//   uint64   row count n
//   n rows of { float32 values[d]; int32 label; }
//
// CSV (.csv): one row per line, "label,v1,...,vd". A first line whose first
// field is not an integer is treated as a header and skipped.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string_view>
#include <vector>

#include "mcam/errors.hpp"

namespace mcam {

class UnreadableFileError : public DataError {
 public:
  using DataError::DataError;
};

class UnknownFormatError : public DataError {
 public:
  using DataError::DataError;
};

class RaggedDimensionError : public DataError {
 public:
  RaggedDimensionError(std::size_t row, std::size_t expected, std::size_t got);
  [[nodiscard]] std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class MalformedDataError : public DataError {
 public:
  using DataError::DataError;
};

enum class VectorFormat { Auto, Binary, Csv };

[[nodiscard]] VectorFormat parse_vector_format(std::string_view name);

struct LabeledTable {
  std::size_t dim = 0;
  std::vector<int> labels;
  std::vector<double> values;  // row-major, labels.size() * dim

  [[nodiscard]] std::size_t size() const noexcept { return labels.size(); }
  [[nodiscard]] std::span<const double> row(std::size_t i) const {
    return std::span<const double>(values).subspan(i * dim, dim);
  }
  void push_back(int label, std::span<const double> v);

  friend bool operator==(const LabeledTable&, const LabeledTable&) = default;
};

// Auto picks the format from the file extension (.mcv/.bin -> binary, .csv -> CSV).
[[nodiscard]] LabeledTable ingest_vectors(const std::filesystem::path& path,
                                          VectorFormat format = VectorFormat::Auto);
void export_vectors(const LabeledTable& table, const std::filesystem::path& path,
                    VectorFormat format = VectorFormat::Auto);

struct FeatureStats {
  double mean = 0.0;
  double std = 1.0;
};
// Mean and population standard deviation over every value in the table.
[[nodiscard]] FeatureStats feature_stats(const LabeledTable& table);

// Gaussian class clusters: each class center is uniform in [0, separation]^d,
// members add N(0, spread^2) per component and are clamped at 0.
struct SyntheticSpec {
  std::size_t classes = 50;
  std::size_t per_class = 20;
  std::size_t dim = 48;
  double separation = 1.0;
  double spread = 0.3;
  std::uint64_t seed = 1;
};
[[nodiscard]] LabeledTable make_synthetic(const SyntheticSpec& spec);

}  // namespace mcam
