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

#include "ermsquash/serialization.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>
#include <vector>

#include "ermsquash/data_io.hpp"
#include "ermsquash/error.hpp"
#include "json.hpp"

namespace ermsquash {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorKind::kIo, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorKind::kIo, "failed writing " + path.string());
}

json parse_json_file(const fs::path& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::kParse, path.string() + ": " + e.what());
  }
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

Eigen::VectorXd from_std(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

json coloring_json(const Coloring& c) { return json::parse(to_json(c)); }

std::string csv_matrix(const SparseMatrix& x, const Eigen::VectorXd& labels,
                       const std::string& label_name) {
  std::string out = label_name;
  for (int j = 0; j < x.cols(); ++j) out += ",c" + std::to_string(j + 1);
  out += '\n';
  const Eigen::MatrixXd dense = x.to_dense();
  for (int i = 0; i < x.rows(); ++i) {
    out += format_double(labels[i]);
    for (int j = 0; j < x.cols(); ++j) out += ',' + format_double(dense(i, j));
    out += '\n';
  }
  return out;
}

double parse_number(const std::string& field, const fs::path& path) {
  double value = 0.0;
  const char* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, value);
  require(ec == std::errc() && ptr == end, ErrorKind::kParse,
          path.string() + ": not a number: '" + field + "'");
  return value;
}

// Reads a matrix written by write_matrix; `keep_zeros` for kernel blocks.
SparseMatrix read_matrix(const fs::path& path, MatrixFormat format, int rows, int cols,
                         bool keep_zeros) {
  const std::string text = read_file(path);
  SparseMatrix x;
  if (format == MatrixFormat::kLibsvm) {
    if (rows == 0) return SparseMatrix(0, cols);
    LibsvmOptions options;
    options.num_features = cols;
    options.map_labels = false;
    x = parse_libsvm(text, options).x;
    if (keep_zeros) x = SparseMatrix::from_dense(x.to_dense(), true);
  } else {
    const CsvTable table = parse_csv(text);
    require(static_cast<int>(table.header.size()) == cols + 1, ErrorKind::kParse,
            path.string() + ": unexpected column count");
    Eigen::MatrixXd dense(static_cast<Eigen::Index>(table.rows.size()), cols);
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      for (int j = 0; j < cols; ++j) dense(i, j) = parse_number(table.rows[i][j + 1], path);
    }
    x = SparseMatrix::from_dense(dense, keep_zeros);
  }
  require(x.rows() == rows && x.cols() == cols, ErrorKind::kParse,
          path.string() + ": matrix shape does not match instance.json");
  return x;
}

std::string matrix_file(const std::string& stem, MatrixFormat format) {
  return stem + (format == MatrixFormat::kLibsvm ? ".svm" : ".csv");
}

void write_matrix(const fs::path& path, const SparseMatrix& x, const Eigen::VectorXd& labels,
                  MatrixFormat format) {
  write_text(path, format == MatrixFormat::kLibsvm ? write_libsvm(x, labels)
                                                   : csv_matrix(x, labels, "target"));
}

json manifest(const Provenance& provenance, const ModelSpec& model, MatrixFormat format,
              const std::vector<std::string>& files, const std::string& kind) {
  json j;
  j["kind"] = kind;
  j["source"] = provenance.source;
  j["input_sha256"] = provenance.input_sha256;
  j["float_key_policy"] = provenance.policy.describe();
  j["model"] = json::parse(to_json(model));
  j["format"] = to_string(format);
  j["files"] = files;
  return j;
}

MatrixFormat format_from_manifest(const fs::path& dir) {
  return parse_matrix_format(parse_json_file(dir / "manifest.json").at("format").get<std::string>());
}

json size_stats(const Coloring& c) {
  const auto sizes = c.sizes();
  json j;
  j["colors"] = c.num_colors();
  j["largest"] = sizes.empty() ? 0 : *std::max_element(sizes.begin(), sizes.end());
  j["singletons"] = std::count(sizes.begin(), sizes.end(), std::size_t{1});
  return j;
}

double ratio(std::size_t reduced, std::size_t original) {
  return original == 0 ? 1.0 : static_cast<double>(reduced) / static_cast<double>(original);
}

}  // namespace

std::string_view to_string(MatrixFormat format) {
  return format == MatrixFormat::kLibsvm ? "libsvm" : "csv";
}

MatrixFormat parse_matrix_format(std::string_view name) {
  if (name == "libsvm" || name == "svm") return MatrixFormat::kLibsvm;
  if (name == "csv") return MatrixFormat::kCsv;
  fail(ErrorKind::kParameter, "unknown matrix format '" + std::string(name) + "'");
}

void write_reduced_instance(const fs::path& dir, const ReducedInstance& r,
                            const Provenance& provenance, MatrixFormat format) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());

  const Eigen::Index n = r.x.rows();
  Eigen::VectorXd labels = Eigen::VectorXd::Zero(n);
  if (r.targets.values.size() == n) labels = r.targets.values;
  const std::string mfile = matrix_file("reduced", format);
  write_matrix(dir / mfile, r.x, labels, format);

  json j;
  j["rows"] = r.x.rows();
  j["cols"] = r.x.cols();
  j["target_values"] = to_std(r.targets.values);
  if (r.targets.has_probs()) {
    json probs = json::array();
    for (Eigen::Index i = 0; i < r.targets.probs.rows(); ++i) {
      probs.push_back(to_std(r.targets.probs.row(i).transpose()));
    }
    j["target_probs"] = probs;
  }
  j["sample_weights"] = to_std(r.sample_weights);
  j["penalty_multipliers"] = to_std(r.penalty_multipliers);
  j["row_color"] = r.row_color;
  j["p"] = coloring_json(r.p);
  j["q"] = coloring_json(r.q);
  j["model"] = json::parse(to_json(r.model));
  j["n_original"] = r.n_original;
  j["d_original"] = r.d_original;
  write_text(dir / "instance.json", j.dump(2) + "\n");

  const std::vector<std::string> files = {mfile, "instance.json", "summary.json"};
  write_text(dir / "manifest.json",
             manifest(provenance, r.model, format, files, "primal").dump(2) + "\n");
  write_text(dir / "summary.json", compression_summary_json(r) + "\n");
}

ReducedInstance read_reduced_instance(const fs::path& dir) {
  const MatrixFormat format = format_from_manifest(dir);
  const json j = parse_json_file(dir / "instance.json");
  try {
    ReducedInstance r;
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    r.x = read_matrix(dir / matrix_file("reduced", format), format, rows, cols, false);
    r.targets.values = from_std(j.at("target_values").get<std::vector<double>>());
    if (j.contains("target_probs")) {
      const auto probs = j.at("target_probs").get<std::vector<std::vector<double>>>();
      const Eigen::Index k = probs.empty() ? 0 : static_cast<Eigen::Index>(probs[0].size());
      r.targets.probs.resize(static_cast<Eigen::Index>(probs.size()), k);
      for (std::size_t i = 0; i < probs.size(); ++i) {
        require(static_cast<Eigen::Index>(probs[i].size()) == k, ErrorKind::kParse,
                "ragged target_probs");
        r.targets.probs.row(i) = from_std(probs[i]).transpose();
      }
    }
    r.sample_weights = from_std(j.at("sample_weights").get<std::vector<double>>());
    r.penalty_multipliers = from_std(j.at("penalty_multipliers").get<std::vector<double>>());
    r.row_color = j.at("row_color").get<std::vector<int>>();
    r.p = coloring_from_json(j.at("p").dump());
    r.q = coloring_from_json(j.at("q").dump());
    r.model = model_spec_from_json(j.at("model").dump());
    r.n_original = j.at("n_original").get<std::size_t>();
    r.d_original = j.at("d_original").get<std::size_t>();
    require(r.sample_weights.size() == rows && r.targets.size() == rows &&
                static_cast<int>(r.row_color.size()) == rows &&
                r.penalty_multipliers.size() == cols && r.p.size() == r.n_original &&
                r.q.size() == r.d_original && r.q.num_colors() == cols,
            ErrorKind::kParse, dir.string() + ": inconsistent instance.json");
    return r;
  } catch (const json::exception& e) {
    fail(ErrorKind::kParse, (dir / "instance.json").string() + ": " + e.what());
  }
}

void write_kernel_reduced(const fs::path& dir, const KernelReduced& r,
                          const Provenance& provenance, MatrixFormat format) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  require(!ec, ErrorKind::kIo, "cannot create " + dir.string() + ": " + ec.message());

  Eigen::VectorXd sizes(r.q.num_colors());
  const auto q_sizes = r.q.sizes();
  for (int t = 0; t < r.q.num_colors(); ++t) sizes[t] = static_cast<double>(q_sizes[t]);
  const std::string quad = matrix_file("k_quad", format);
  const std::string logit = matrix_file("k_logit", format);
  write_matrix(dir / quad, r.k_quad, sizes, format);
  write_matrix(dir / logit, r.k_logit, r.y, format);

  json j;
  j["rows"] = r.k_logit.rows();
  j["cols"] = r.k_quad.rows();
  j["y"] = to_std(r.y);
  j["sample_weights"] = to_std(r.sample_weights);
  j["row_color"] = r.row_color;
  j["p"] = coloring_json(r.p);
  j["q"] = coloring_json(r.q);
  j["lambda"] = r.lambda;
  j["family"] = to_string(r.family);
  j["n_original"] = r.n_original;
  write_text(dir / "instance.json", j.dump(2) + "\n");

  ModelSpec model;
  model.family = r.family;
  model.lambda2 = r.lambda;
  const std::vector<std::string> files = {quad, logit, "instance.json", "summary.json"};
  write_text(dir / "manifest.json",
             manifest(provenance, model, format, files, "kernel").dump(2) + "\n");
  write_text(dir / "summary.json", compression_summary_json(r) + "\n");
}

KernelReduced read_kernel_reduced(const fs::path& dir) {
  const MatrixFormat format = format_from_manifest(dir);
  const json j = parse_json_file(dir / "instance.json");
  try {
    KernelReduced r;
    const int rows = j.at("rows").get<int>();
    const int cols = j.at("cols").get<int>();
    r.k_quad = read_matrix(dir / matrix_file("k_quad", format), format, cols, cols, true);
    r.k_logit = read_matrix(dir / matrix_file("k_logit", format), format, rows, cols, true);
    r.y = from_std(j.at("y").get<std::vector<double>>());
    r.sample_weights = from_std(j.at("sample_weights").get<std::vector<double>>());
    r.row_color = j.at("row_color").get<std::vector<int>>();
    r.p = coloring_from_json(j.at("p").dump());
    r.q = coloring_from_json(j.at("q").dump());
    r.lambda = j.at("lambda").get<double>();
    r.family = parse_model_family(j.at("family").get<std::string>());
    r.n_original = j.at("n_original").get<std::size_t>();
    require(r.y.size() == rows && r.sample_weights.size() == rows &&
                static_cast<int>(r.row_color.size()) == rows && r.p.num_colors() == rows &&
                r.q.num_colors() == cols && r.p.size() == r.n_original &&
                r.q.size() == r.n_original,
            ErrorKind::kParse, dir.string() + ": inconsistent instance.json");
    return r;
  } catch (const json::exception& e) {
    fail(ErrorKind::kParse, (dir / "instance.json").string() + ": " + e.what());
  }
}

std::string compression_summary_json(const ReducedInstance& r) {
  json j;
  j["kind"] = "primal";
  j["model"] = to_string(r.model.family);
  j["n_original"] = r.n_original;
  j["n_reduced"] = r.n_reduced();
  j["d_original"] = r.d_original;
  j["d_reduced"] = r.d_reduced();
  j["sample_ratio"] = ratio(r.n_reduced(), r.n_original);
  j["feature_ratio"] = ratio(r.d_reduced(), r.d_original);
  j["sample_colors"] = size_stats(r.p);
  j["feature_colors"] = size_stats(r.q);
  return j.dump(2);
}

std::string compression_summary_json(const KernelReduced& r) {
  json j;
  j["kind"] = "kernel";
  j["model"] = to_string(r.family);
  j["n_original"] = r.n_original;
  j["n_reduced"] = r.n_reduced_rows();
  j["coefficients_reduced"] = r.n_reduced_coefficients();
  j["sample_ratio"] = ratio(r.n_reduced_rows(), r.n_original);
  j["coefficient_ratio"] = ratio(r.n_reduced_coefficients(), r.n_original);
  j["loss_colors"] = size_stats(r.p);
  j["coefficient_colors"] = size_stats(r.q);
  return j.dump(2);
}

std::string check_kernel_reduced_standalone(const KernelReduced& r) {
  const int nq = r.q.num_colors(), np = r.p.num_colors();
  if (r.k_quad.rows() != nq || r.k_quad.cols() != nq) return "K_quad is not |Q| x |Q|";
  if (r.k_logit.rows() != np || r.k_logit.cols() != nq) return "K_logit is not |P| x |Q|";
  if (static_cast<int>(r.row_color.size()) != np) return "row_color does not cover P";
  if (!r.p.refines(r.q)) return "P does not refine Q";
  if (!r.k_quad.is_symmetric()) return "K_quad is not symmetric";
  for (std::size_t i = 0; i < r.p.size(); ++i) {
    if (r.row_color[r.p[i]] != r.q[i]) {
      return "row_color of P-color " + std::to_string(r.p[i]) + " is not the Q-color of sample " +
             std::to_string(i);
    }
  }
  const auto sizes = r.q.sizes();
  const Eigen::MatrixXd quad = r.k_quad.to_dense();
  const Eigen::MatrixXd logit = r.k_logit.to_dense();
  std::vector<int> first(nq, -1);
  for (int s = 0; s < np; ++s) {
    const int t = r.row_color[s];
    if (first[t] < 0) {
      first[t] = s;
    } else if (logit.row(s) != logit.row(first[t])) {
      return "K_logit rows " + std::to_string(first[t]) + " and " + std::to_string(s) +
             " differ inside coefficient color " + std::to_string(t);
    }
    for (int u = 0; u < nq; ++u) {
      const double expect = static_cast<double>(sizes[t]) * logit(s, u);
      const double scale = std::max({1.0, std::abs(expect), std::abs(quad(t, u))});
      if (std::abs(quad(t, u) - expect) > 1e-12 * scale) {
        return "K_quad(" + std::to_string(t) + "," + std::to_string(u) + ") != |T| K_logit(" +
               std::to_string(s) + "," + std::to_string(u) + ")";
      }
    }
  }
  return {};
}

}  // namespace ermsquash
