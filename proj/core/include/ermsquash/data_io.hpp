// Copyright 2026 The ermsquash Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef ERMSQUASH_DATA_IO_HPP_
#define ERMSQUASH_DATA_IO_HPP_

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "ermsquash/sparse_matrix.hpp"

namespace ermsquash {

struct Dataset {
  SparseMatrix x;
  Eigen::VectorXd y;
  Eigen::VectorXd v;  // all ones unless weights were supplied
  std::vector<std::string> feature_names;
  // Original label text and its class id, ordered by id. Empty when the
  // labels were kept as raw values.
  std::vector<std::pair<std::string, int>> label_map;

  int num_classes() const { return static_cast<int>(label_map.size()); }
};

struct LibsvmOptions {
  // Matrix width; 0 means the largest index seen. Must cover every index.
  int num_features = 0;
  // Map distinct labels, sorted numerically, to class ids 0..K-1. When
  // false the labels are kept as regression targets.
  bool map_labels = true;
};

// Lines hold a label followed by index:value pairs with strictly increasing
// 1-based indices. Blank lines and '#' comments are skipped.
Dataset parse_libsvm(std::string_view text, const LibsvmOptions& options = {});

// Shortest round-trip decimal formatting; explicit zeros are written.
std::string write_libsvm(const SparseMatrix& x, const Eigen::VectorXd& y);

// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Comma-separated text with a header row; fields may be double-quoted with
// "" as an escaped quote.
CsvTable parse_csv(std::string_view text);

enum class ColumnRole { kNumeric, kCategorical, kDrop, kLabel };

// JSON layout:
//   {"columns": [{"name": "age", "type": "numeric"}, ...],
//    "missing_values": ["", "?"],            (optional)
//    "default_type": "drop"}                 (optional, for unlisted columns)
// Exactly one column has type "label".
struct TabularSchema {
  std::vector<std::pair<std::string, ColumnRole>> columns;
  std::vector<std::string> missing_values = {"", "?"};
  std::optional<ColumnRole> default_role;

  static TabularSchema from_json(std::string_view text);
};

// Categorical columns become drop-first one-hot indicators over the sorted
// categories, with a missing value as its own category sorted last. Numeric
// columns are mean-imputed. Features follow the CSV column order.
Dataset preprocess_tabular(const CsvTable& table, const TabularSchema& schema);

std::string read_file(const std::filesystem::path& path);

// LIBSVM for any extension except .csv, which requires a schema.
Dataset load_dataset(const std::filesystem::path& path,
                     const std::optional<std::filesystem::path>& schema_path = std::nullopt,
                     const LibsvmOptions& options = {});

// Lowercase hex SHA-256 of the bytes.
std::string sha256_hex(std::string_view bytes);

// {"source": ..., "sha256": ..., "rows": n, "cols": d, "nnz": k,
//  "num_classes": K}
std::string dataset_manifest_json(const Dataset& data, std::string_view source,
                                  std::string_view content_sha256);

}  // namespace ermsquash

#endif  // ERMSQUASH_DATA_IO_HPP_
