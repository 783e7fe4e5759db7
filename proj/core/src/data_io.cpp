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

#include "ermsquash/data_io.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <system_error>

#include "ermsquash/error.hpp"
#include "json.hpp"

namespace ermsquash {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return std::nullopt;
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || !std::isfinite(value)) {
    return std::nullopt;
  }
  return value;
}

std::optional<long long> parse_index(std::string_view s) {
  long long value = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return value;
}

[[noreturn]] void parse_error(std::size_t line, const std::string& msg) {
  fail(ErrorKind::kParse, "line " + std::to_string(line) + ": " + msg);
}

std::string_view role_name(ColumnRole role) {
  switch (role) {
    case ColumnRole::kNumeric: return "numeric";
    case ColumnRole::kCategorical: return "categorical";
    case ColumnRole::kDrop: return "drop";
    case ColumnRole::kLabel: return "label";
  }
  return "unknown";
}

ColumnRole parse_role(const std::string& name) {
  for (auto role : {ColumnRole::kNumeric, ColumnRole::kCategorical, ColumnRole::kDrop,
                    ColumnRole::kLabel}) {
    if (name == role_name(role)) return role;
  }
  fail(ErrorKind::kSchema, "unknown column type '" + name + "'");
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  require(ec == std::errc(), ErrorKind::kInvariant, "double formatting failed");
  return std::string(buf, ptr);
}

Dataset parse_libsvm(std::string_view text, const LibsvmOptions& options) {
  require(options.num_features >= 0, ErrorKind::kParameter, "num_features must be >= 0");
  std::vector<int> row_ptr{0};
  std::vector<int> col_idx;
  std::vector<double> values;
  std::vector<double> labels;
  long long max_index = 0;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t end = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    std::istringstream tokens{std::string(line)};
    std::string token;
    if (!(tokens >> token)) {
      if (end == text.size()) break;
      continue;
    }
    const auto label = parse_double(token);
    if (!label) parse_error(line_no, "invalid label '" + token + "'");
    labels.push_back(*label);
    long long previous = 0;
    while (tokens >> token) {
      const auto colon = token.find(':');
      if (colon == std::string::npos) parse_error(line_no, "malformed pair '" + token + "'");
      const auto index = parse_index(std::string_view(token).substr(0, colon));
      if (!index || *index < 1 || *index > std::numeric_limits<int>::max()) {
        parse_error(line_no, "invalid feature index in '" + token + "'");
      }
      if (*index <= previous) {
        parse_error(line_no, "feature indices must be strictly increasing at '" + token + "'");
      }
      const auto value = parse_double(std::string_view(token).substr(colon + 1));
      if (!value) parse_error(line_no, "invalid value in '" + token + "'");
      previous = *index;
      max_index = std::max(max_index, *index);
      col_idx.push_back(static_cast<int>(*index - 1));
      values.push_back(*value);
    }
    row_ptr.push_back(static_cast<int>(col_idx.size()));
    if (end == text.size()) break;
  }
  require(!labels.empty(), ErrorKind::kEmpty, "dataset has no samples");
  int width = static_cast<int>(max_index);
  if (options.num_features > 0) {
    require(options.num_features >= max_index, ErrorKind::kParameter,
            "num_features " + std::to_string(options.num_features) +
                " is smaller than the largest index " + std::to_string(max_index));
    width = options.num_features;
  }

  Dataset out;
  const auto n = static_cast<int>(labels.size());
  out.x = SparseMatrix::from_csr(n, width, std::move(row_ptr), std::move(col_idx),
                                 std::move(values));
  out.y.resize(n);
  out.v = Eigen::VectorXd::Ones(n);
  if (options.map_labels) {
    std::set<double> distinct;
    for (double l : labels) distinct.insert(l == 0.0 ? 0.0 : l);
    std::map<double, int> ids;
    for (double l : distinct) {
      const int id = static_cast<int>(ids.size());
      ids.emplace(l, id);
      out.label_map.emplace_back(format_double(l), id);
    }
    for (int i = 0; i < n; ++i) out.y[i] = ids.at(labels[i] == 0.0 ? 0.0 : labels[i]);
  } else {
    for (int i = 0; i < n; ++i) out.y[i] = labels[i];
  }
  out.feature_names.reserve(static_cast<std::size_t>(width));
  for (int j = 0; j < width; ++j) out.feature_names.push_back("f" + std::to_string(j + 1));
  return out;
}

std::string write_libsvm(const SparseMatrix& x, const Eigen::VectorXd& y) {
  require(y.size() == x.rows(), ErrorKind::kDimension, "one label per row expected");
  std::string out;
  for (int i = 0; i < x.rows(); ++i) {
    out += format_double(y[i]);
    const auto cols = x.row_indices(i);
    const auto vals = x.row_values(i);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      out += ' ';
      out += std::to_string(cols[k] + 1);
      out += ':';
      out += format_double(vals[k]);
    }
    out += '\n';
  }
  return out;
}

CsvTable parse_csv(std::string_view text) {
  std::vector<std::vector<std::string>> records;
  std::vector<std::size_t> record_lines;
  std::vector<std::string> record;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  std::size_t record_line = 1;
  auto end_record = [&] {
    record.push_back(std::move(field));
    field.clear();
    const bool blank = record.size() == 1 && record[0].empty() && !field_started;
    if (!blank) {
      records.push_back(std::move(record));
      record_lines.push_back(record_line);
    }
    record.clear();
    field_started = false;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < text.size() && text[i + 1] == '"') {
          field += '"';
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field += c;
      }
      continue;
    }
    switch (c) {
      case '"':
        in_quotes = true;
        field_started = true;
        break;
      case ',':
        record.push_back(std::move(field));
        field.clear();
        field_started = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        record_line = ++line;
        break;
      default:
        field += c;
        field_started = true;
    }
  }
  if (in_quotes) parse_error(line, "unterminated quoted field");
  if (field_started || !field.empty() || !record.empty()) end_record();
  require(!records.empty(), ErrorKind::kEmpty, "CSV has no header row");

  CsvTable table;
  table.header = std::move(records.front());
  for (auto& h : table.header) h = std::string(trim(h));
  for (std::size_t r = 1; r < records.size(); ++r) {
    if (records[r].size() != table.header.size()) {
      parse_error(record_lines[r], "expected " + std::to_string(table.header.size()) +
                                       " fields, found " + std::to_string(records[r].size()));
    }
    table.rows.push_back(std::move(records[r]));
  }
  return table;
}

TabularSchema TabularSchema::from_json(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("schema is not valid JSON: ") + e.what());
  }
  require(j.is_object() && j.contains("columns") && j["columns"].is_array(), ErrorKind::kSchema,
          "schema needs a \"columns\" array");
  TabularSchema schema;
  for (const auto& col : j["columns"]) {
    require(col.is_object() && col.contains("name") && col.contains("type") &&
                col["name"].is_string() && col["type"].is_string(),
            ErrorKind::kSchema, "every schema column needs string \"name\" and \"type\"");
    schema.columns.emplace_back(col["name"].get<std::string>(),
                                parse_role(col["type"].get<std::string>()));
  }
  if (j.contains("missing_values")) {
    require(j["missing_values"].is_array(), ErrorKind::kSchema,
            "\"missing_values\" must be an array of strings");
    schema.missing_values.clear();
    for (const auto& m : j["missing_values"]) {
      require(m.is_string(), ErrorKind::kSchema, "\"missing_values\" must hold strings");
      schema.missing_values.push_back(m.get<std::string>());
    }
  }
  if (j.contains("default_type")) {
    require(j["default_type"].is_string(), ErrorKind::kSchema, "\"default_type\" must be a string");
    schema.default_role = parse_role(j["default_type"].get<std::string>());
  }
  return schema;
}

Dataset preprocess_tabular(const CsvTable& table, const TabularSchema& schema) {
  std::map<std::string, ColumnRole> declared;
  int labels_declared = 0;
  for (const auto& [name, role] : schema.columns) {
    require(declared.emplace(name, role).second, ErrorKind::kSchema,
            "column '" + name + "' declared twice");
    labels_declared += role == ColumnRole::kLabel;
  }
  require(labels_declared == 1, ErrorKind::kSchema, "schema must declare exactly one label column");
  for (const auto& [name, role] : schema.columns) {
    require(std::find(table.header.begin(), table.header.end(), name) != table.header.end(),
            ErrorKind::kSchema, "schema column '" + name + "' (" +
                                    std::string(role_name(role)) + ") is not in the data");
  }
  std::vector<ColumnRole> roles;
  for (const auto& h : table.header) {
    const auto it = declared.find(h);
    if (it != declared.end()) {
      roles.push_back(it->second);
    } else {
      require(schema.default_role.has_value(), ErrorKind::kSchema,
              "column '" + h + "' is not in the schema");
      require(*schema.default_role != ColumnRole::kLabel, ErrorKind::kSchema,
              "default_type cannot be label");
      roles.push_back(*schema.default_role);
    }
  }
  const auto is_missing = [&](const std::string& raw) {
    const std::string_view s = trim(raw);
    return std::find(schema.missing_values.begin(), schema.missing_values.end(), s) !=
           schema.missing_values.end();
  };
  const int n = static_cast<int>(table.rows.size());
  require(n > 0, ErrorKind::kEmpty, "CSV has no data rows");

  Dataset out;
  std::vector<SparseMatrix::Triplet> triplets;
  int next_col = 0;
  for (std::size_t c = 0; c < table.header.size(); ++c) {
    const std::string& name = table.header[c];
    switch (roles[c]) {
      case ColumnRole::kDrop:
        break;
      case ColumnRole::kLabel: {
        std::vector<std::string> text(static_cast<std::size_t>(n));
        bool numeric = true;
        for (int r = 0; r < n; ++r) {
          const std::string& raw = table.rows[r][c];
          require(!is_missing(raw), ErrorKind::kInput,
                  "row " + std::to_string(r + 1) + ": missing label");
          text[r] = std::string(trim(raw));
          numeric = numeric && parse_double(text[r]).has_value();
        }
        std::vector<std::string> distinct(text);
        std::sort(distinct.begin(), distinct.end(), [&](const auto& a, const auto& b) {
          return numeric ? *parse_double(a) < *parse_double(b) : a < b;
        });
        distinct.erase(std::unique(distinct.begin(), distinct.end(),
                                   [&](const auto& a, const auto& b) {
                                     return numeric ? *parse_double(a) == *parse_double(b)
                                                    : a == b;
                                   }),
                       distinct.end());
        for (const auto& d : distinct) {
          out.label_map.emplace_back(d, static_cast<int>(out.label_map.size()));
        }
        out.y.resize(n);
        for (int r = 0; r < n; ++r) {
          for (const auto& [label, id] : out.label_map) {
            if (numeric ? *parse_double(label) == *parse_double(text[r]) : label == text[r]) {
              out.y[r] = id;
              break;
            }
          }
        }
        break;
      }
      case ColumnRole::kNumeric: {
        std::vector<std::optional<double>> values(static_cast<std::size_t>(n));
        double sum = 0.0;
        int present = 0;
        for (int r = 0; r < n; ++r) {
          const std::string& raw = table.rows[r][c];
          if (is_missing(raw)) continue;
          values[r] = parse_double(raw);
          if (!values[r]) {
            fail(ErrorKind::kParse, "row " + std::to_string(r + 1) + ", column '" + name +
                                        "': '" + raw + "' is not a number");
          }
          sum += *values[r];
          ++present;
        }
        const double mean = present > 0 ? sum / present : 0.0;
        for (int r = 0; r < n; ++r) {
          const double value = values[r].value_or(mean);
          if (value != 0.0) triplets.push_back({r, next_col, value});
        }
        out.feature_names.push_back(name);
        ++next_col;
        break;
      }
      case ColumnRole::kCategorical: {
        std::set<std::string> categories;
        bool any_missing = false;
        for (int r = 0; r < n; ++r) {
          const std::string& raw = table.rows[r][c];
          if (is_missing(raw)) {
            any_missing = true;
          } else {
            categories.insert(std::string(trim(raw)));
          }
        }
        std::vector<std::string> order(categories.begin(), categories.end());
        std::map<std::string, int> column_of;
        // The first category is dropped; the missing category sorts last.
        for (std::size_t k = 1; k < order.size(); ++k) {
          column_of[order[k]] = next_col + static_cast<int>(k) - 1;
        }
        int indicator_count = static_cast<int>(order.size()) - 1 + (any_missing ? 1 : 0);
        if (order.empty()) indicator_count = 0;
        const int missing_col = any_missing && !order.empty()
                                    ? next_col + static_cast<int>(order.size()) - 1
                                    : -1;
        for (int r = 0; r < n; ++r) {
          const std::string& raw = table.rows[r][c];
          if (is_missing(raw)) {
            if (missing_col >= 0) triplets.push_back({r, missing_col, 1.0});
            continue;
          }
          const auto it = column_of.find(std::string(trim(raw)));
          if (it != column_of.end()) triplets.push_back({r, it->second, 1.0});
        }
        for (std::size_t k = 1; k < order.size(); ++k) {
          out.feature_names.push_back(name + "=" + order[k]);
        }
        if (missing_col >= 0) out.feature_names.push_back(name + "=<missing>");
        next_col += indicator_count;
        break;
      }
    }
  }
  out.x = SparseMatrix::from_triplets(n, next_col, std::move(triplets));
  out.v = Eigen::VectorXd::Ones(n);
  return out;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  require(!in.bad(), ErrorKind::kIo, "cannot read '" + path.string() + "'");
  return buffer.str();
}

Dataset load_dataset(const std::filesystem::path& path,
                     const std::optional<std::filesystem::path>& schema_path,
                     const LibsvmOptions& options) {
  const std::string text = read_file(path);
  if (path.extension() == ".csv") {
    require(schema_path.has_value(), ErrorKind::kParameter,
            "CSV input needs a schema (" + path.string() + ")");
    return preprocess_tabular(parse_csv(text),
                              TabularSchema::from_json(read_file(*schema_path)));
  }
  return parse_libsvm(text, options);
}

std::string sha256_hex(std::string_view bytes) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  require(EVP_Digest(bytes.data(), bytes.size(), digest, &length, EVP_sha256(), nullptr) == 1,
          ErrorKind::kInvariant, "SHA-256 computation failed");
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(2 * length);
  for (unsigned int i = 0; i < length; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

std::string dataset_manifest_json(const Dataset& data, std::string_view source,
                                  std::string_view content_sha256) {
  nlohmann::json j;
  j["source"] = source;
  j["sha256"] = content_sha256;
  j["rows"] = data.x.rows();
  j["cols"] = data.x.cols();
  j["nnz"] = data.x.nnz();
  j["num_classes"] = data.num_classes();
  return j.dump(2);
}

}  // namespace ermsquash
