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

#include "cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ermsquash/data_io.hpp"
#include "ermsquash/kernels.hpp"
#include "ermsquash/model.hpp"
#include "ermsquash/reductions.hpp"
#include "ermsquash/refinement.hpp"
#include "ermsquash/serialization.hpp"
#include "ermsquash/solvers.hpp"
#include "ermsquash/verify_bench.hpp"
#include "json.hpp"

namespace ermsquash::cli {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct DataFlags {
  std::string input;
  std::string schema;
  std::string format = "auto";
  std::string label_column;
  int poly_degree = 1;
};

struct ModelFlags {
  std::string model = "logistic";
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  int classes = 0;
  std::string kernel = "none";
  double gamma = 1.0;
  int degree = 2;
  double coef0 = 0.0;
  std::string merge = "auto";
  bool standardize = true;
  bool penalize_bias = false;
};

struct RunFlags {
  std::optional<int> quantize_digits;
  int threads = 0;
  std::uint64_t seed = 0;
  double tol = 1e-8;
  int max_iter = 10000;
};

struct Flags {
  DataFlags data;
  ModelFlags model;
  RunFlags run;
  std::string output;
  std::string matrix_format = "libsvm";
  bool via_reduction = false;
  std::string report_format;
  double max_rel_delta = 1e-6;
  double max_abs_delta = -1.0;
  double max_pred_delta = -1.0;
  int trials = 10;
  std::string equitable;
  std::string rows = "unit";
  std::string cols = "unit";
};

struct Loaded {
  Dataset data;
  std::string sha256;
  std::string source;
};

void add_data_flags(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("input", f.input, "Dataset (LIBSVM, or CSV)")->required();
  cmd->add_option("--schema", f.schema, "Tabular schema JSON for CSV input");
  cmd->add_option("--format", f.format, "Input format")
      ->check(CLI::IsMember({"auto", "libsvm", "csv"}));
  cmd->add_option("--label-column", f.label_column,
                  "Label column of a CSV read without schema (default: first column)");
  cmd->add_option("--poly-degree", f.poly_degree, "Polynomial feature expansion degree")
      ->check(CLI::PositiveNumber);
}

void add_model_flags(CLI::App* cmd, ModelFlags& f) {
  cmd->add_option("--model", f.model,
                  "linreg, ridge, elasticnet, logistic, multiclass, kernel-ridge, "
                  "kernel-logistic");
  cmd->add_option("--lambda1", f.lambda1, "L1 penalty weight");
  cmd->add_option("--lambda2", f.lambda2, "L2 penalty weight (kernel regularizer)");
  cmd->add_option("--classes", f.classes, "Number of classes (default: from the labels)");
  cmd->add_option("--kernel", f.kernel, "none, linear, rbf, poly");
  cmd->add_option("--gamma", f.gamma, "RBF width");
  cmd->add_option("--degree", f.degree, "Polynomial kernel degree");
  cmd->add_option("--coef0", f.coef0, "Polynomial kernel offset");
  cmd->add_option("--merge", f.merge, "auto, per_label, mean_target");
  cmd->add_flag("--standardize,!--no-standardize", f.standardize,
                "Fit unpenalized iterative models in standardized coordinates");
  cmd->add_flag("--penalize-bias", f.penalize_bias, "No separate intercept");
}

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--quantize-digits", f.quantize_digits,
                  "Round refinement sums to this many decimals (lossy)")
      ->check(CLI::Range(0, 15));
  cmd->add_option("--threads", f.threads, "Worker threads (default: ERM_SQUASH_THREADS)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", f.seed, "Seed recorded in reports");
  cmd->add_option("--tol", f.tol, "Solver tolerance")->check(CLI::PositiveNumber);
  cmd->add_option("--max-iter", f.max_iter, "Solver iteration limit")
      ->check(CLI::PositiveNumber);
}

// Validates model flags without touching the input. num_classes is refined
// once the labels are known.
ModelSpec build_spec(const ModelFlags& f) {
  ModelSpec s;
  s.family = parse_model_family(f.model);
  s.lambda1 = f.lambda1;
  s.lambda2 = f.lambda2;
  s.kernel.kind = parse_kernel_kind(f.kernel);
  if (s.is_kernel() && s.kernel.kind == KernelSpec::Kind::kNone) {
    s.kernel.kind = KernelSpec::Kind::kRbf;
  }
  s.kernel.gamma = f.gamma;
  s.kernel.degree = f.degree;
  s.kernel.coef0 = f.coef0;
  s.merge_mode = parse_merge_mode(f.merge);
  s.standardize = f.standardize;
  s.penalize_bias = f.penalize_bias;
  if (f.classes > 0) {
    s.num_classes = f.classes;
  } else {
    s.num_classes = s.family == ModelFamily::kLogisticMulticlass ? 3 : 2;
  }
  s.validate();
  return s;
}

FloatKeyPolicy policy_of(const RunFlags& f) {
  FloatKeyPolicy p;
  p.quantize_digits = f.quantize_digits;
  return p;
}

VerifyConfig config_of(const RunFlags& f) {
  VerifyConfig c;
  c.solver.tol = f.tol;
  c.solver.max_iter = f.max_iter;
  c.policy = policy_of(f);
  c.threads = resolve_thread_count(f.threads);
  c.seed = f.seed;
  return c;
}

std::optional<double> to_number(const std::string& text) {
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return value;
}

Dataset load_csv(const std::string& text, const DataFlags& f) {
  const CsvTable table = parse_csv(text);
  TabularSchema schema;
  if (!f.schema.empty()) {
    schema = TabularSchema::from_json(read_file(f.schema));
  } else {
    require(!table.header.empty(), ErrorKind::kInput, "CSV has no columns");
    const std::string label = f.label_column.empty() ? table.header.front() : f.label_column;
    bool found = false;
    for (const auto& name : table.header) {
      const bool is_label = name == label;
      found = found || is_label;
      schema.columns.emplace_back(name, is_label ? ColumnRole::kLabel : ColumnRole::kNumeric);
    }
    require(found, ErrorKind::kInput, "label column '" + label + "' not in CSV header");
  }
  return preprocess_tabular(table, schema);
}

// Classification keeps class ids; regression needs the numeric label values.
void restore_regression_targets(Dataset& d) {
  if (d.label_map.empty()) return;
  for (Eigen::Index i = 0; i < d.y.size(); ++i) {
    const auto& text = d.label_map[static_cast<std::size_t>(d.y[i])].first;
    const auto value = to_number(text);
    require(value.has_value(), ErrorKind::kInput,
            "regression target '" + text + "' is not a number");
    d.y[i] = *value;
  }
  d.label_map.clear();
}

Loaded load(const DataFlags& f, ModelSpec& spec, bool override_classes) {
  Loaded out;
  out.source = f.input;
  const std::string text = read_file(f.input);
  out.sha256 = sha256_hex(text);
  std::string format = f.format;
  if (format == "auto") format = fs::path(f.input).extension() == ".csv" ? "csv" : "libsvm";
  if (format == "csv") {
    out.data = load_csv(text, f);
    if (!spec.is_classification()) restore_regression_targets(out.data);
  } else {
    LibsvmOptions options;
    options.map_labels = spec.is_classification();
    out.data = parse_libsvm(text, options);
  }
  if (f.poly_degree > 1) {
    require(!spec.is_kernel(), ErrorKind::kParameter,
            "--poly-degree applies to primal models only");
    out.data.x = expand_polynomial(out.data.x, f.poly_degree);
    out.data.feature_names.clear();
  }
  if (spec.is_classification()) {
    const int k = out.data.num_classes();
    if (spec.family == ModelFamily::kLogisticMulticlass) {
      if (override_classes) spec.num_classes = std::max(k, 2);
      require(k <= spec.num_classes, ErrorKind::kInput,
              std::to_string(k) + " labels exceed --classes " + std::to_string(spec.num_classes));
    } else {
      require(k <= 2, ErrorKind::kInput,
              "binary model given " + std::to_string(k) +
                  " distinct labels; use --model multiclass");
    }
    spec.validate();
  }
  return out;
}

SolverOptions solver_of(const RunFlags& f, const ModelSpec& spec) {
  SolverOptions o;
  o.tol = f.tol;
  o.max_iter = f.max_iter;
  o.standardize = spec.standardize;
  return o;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

json matrix_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) rows.push_back(to_std(m.row(i).transpose()));
  return rows;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text << '\n';
    return;
  }
  std::ofstream file(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(file), ErrorKind::kIo, "cannot write " + path);
  file << text << '\n';
}

int cmd_compress(const Flags& f, std::ostream& out) {
  require(!f.output.empty(), ErrorKind::kParameter, "compress needs -o/--output");
  const MatrixFormat format = parse_matrix_format(f.matrix_format);
  ModelSpec spec = build_spec(f.model);
  const Loaded in = load(f.data, spec, f.model.classes == 0);
  const Provenance prov{in.source, in.sha256, policy_of(f.run)};
  if (spec.is_kernel()) {
    const SparseMatrix k =
        compute_kernel(in.data.x, spec.kernel, resolve_thread_count(f.run.threads));
    const KernelReduced r =
        spec.family == ModelFamily::kKernelLogistic
            ? reduce_kernel_logistic(k, in.data.y, in.data.v, spec.lambda2, prov.policy)
            : reduce_kernel_ridge(k, in.data.y, in.data.v, spec.lambda2, prov.policy);
    write_kernel_reduced(f.output, r, prov, format);
    out << compression_summary_json(r) << '\n';
  } else {
    const ReducedInstance r = reduce_erm(in.data.x, in.data.y, in.data.v, spec, prov.policy);
    write_reduced_instance(f.output, r, prov, format);
    out << compression_summary_json(r) << '\n';
  }
  return kExitOk;
}

int cmd_fit(const Flags& f, std::ostream& out) {
  ModelSpec spec = build_spec(f.model);
  const Loaded in = load(f.data, spec, f.model.classes == 0);
  const SolverOptions options = solver_of(f.run, spec);
  const FloatKeyPolicy policy = policy_of(f.run);
  const Dataset& d = in.data;
  json j;
  j["model"] = json::parse(to_json(spec));
  j["source"] = in.source;
  j["input_sha256"] = in.sha256;
  j["via_reduction"] = f.via_reduction;
  j["seed"] = f.run.seed;
  FitResult fit;
  if (spec.is_kernel()) {
    const SparseMatrix k = compute_kernel(d.x, spec.kernel, resolve_thread_count(f.run.threads));
    Eigen::VectorXd alpha;
    double b = 0.0;
    if (f.via_reduction) {
      const KernelReduced r =
          spec.family == ModelFamily::kKernelLogistic
              ? reduce_kernel_logistic(k, d.y, d.v, spec.lambda2, policy)
              : reduce_kernel_ridge(k, d.y, d.v, spec.lambda2, policy);
      fit = fit_kernel(r, options);
      alpha = expand(fit.coefficients.col(0), r.q);
    } else if (spec.family == ModelFamily::kKernelLogistic) {
      fit = solve_kernel_logistic(k, k, d.y, d.v, spec.lambda2, options);
      alpha = fit.coefficients.col(0);
    } else {
      fit = solve_kernel_ridge(k, k, d.y, d.v, spec.lambda2);
      alpha = fit.coefficients.col(0);
    }
    b = fit.bias[0];
    j["objective"] = evaluate_kernel(spec.family, k, k, d.y, d.v, spec.lambda2, alpha, b).objective;
    j["coefficients"] = to_std(alpha);
    j["bias"] = std::vector<double>{b};
  } else {
    const Targets targets{d.y, {}};
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(d.x.cols());
    Eigen::MatrixXd w;
    Eigen::VectorXd b;
    if (f.via_reduction) {
      const ReducedInstance r = reduce_erm(d.x, d.y, d.v, spec, policy);
      fit = fit_reduced(r, options);
      const LiftedParams lifted = lift_solution(fit.coefficients, fit.bias, r.q);
      w = lifted.w;
      b = lifted.b;
    } else {
      fit = fit_primal(d.x, targets, d.v, spec, ones, options);
      w = fit.coefficients;
      b = fit.bias;
    }
    j["objective"] = evaluate_primal(spec, d.x, targets, d.v, ones, w, b).objective;
    j["coefficients"] = matrix_json(w);
    j["bias"] = to_std(b);
  }
  j["fit"] = json::parse(to_json(fit));
  emit(j.dump(2), f.output, out);
  return kExitOk;
}

void write_report(const EquivalenceReport& r, const std::string& format, std::ostream& out) {
  if (format == "json") {
    out << to_json(r) << '\n';
  } else {
    out << to_text_table(r);
  }
}

int cmd_verify(const Flags& f, std::ostream& out, std::ostream& err) {
  ModelSpec spec = build_spec(f.model);
  const Loaded in = load(f.data, spec, f.model.classes == 0);
  EquivalenceReport r = verify_equivalence(in.data, spec, config_of(f.run));
  r.dataset = fs::path(in.source).filename().string();
  write_report(r, f.report_format.empty() ? "table" : f.report_format, out);

  std::string breach;
  if (!(r.rel_obj_delta <= f.max_rel_delta)) breach = "rel_obj_delta";
  if (f.max_abs_delta >= 0.0 && !(r.abs_obj_delta <= f.max_abs_delta)) breach = "abs_obj_delta";
  if (f.max_pred_delta >= 0.0 && !(r.max_abs_pred_delta <= f.max_pred_delta)) {
    breach = "max_abs_pred_delta";
  }
  if (!breach.empty()) {
    err << "error:threshold: " << breach << " exceeds its configured limit\n";
    return kExitThreshold;
  }
  return kExitOk;
}

int cmd_bench(const Flags& f, std::ostream& out) {
  ModelSpec spec = build_spec(f.model);
  const Loaded in = load(f.data, spec, f.model.classes == 0);
  EquivalenceReport r = run_benchmark(in.data, spec, f.trials, config_of(f.run));
  r.dataset = fs::path(in.source).filename().string();
  write_report(r, f.report_format.empty() ? "json" : f.report_format, out);
  return kExitOk;
}

SparseMatrix read_plain_matrix(const std::string& path) {
  const std::string text = read_file(path);
  if (fs::path(path).extension() != ".csv") {
    LibsvmOptions options;
    options.map_labels = false;
    return parse_libsvm(text, options).x;
  }
  const CsvTable table = parse_csv(text);
  std::vector<std::vector<std::string>> rows;
  bool header_numeric = true;
  for (const auto& h : table.header) header_numeric = header_numeric && to_number(h).has_value();
  if (header_numeric) rows.push_back(table.header);
  rows.insert(rows.end(), table.rows.begin(), table.rows.end());
  require(!rows.empty(), ErrorKind::kEmpty, path + ": no matrix rows");
  Eigen::MatrixXd dense(static_cast<Eigen::Index>(rows.size()),
                        static_cast<Eigen::Index>(rows[0].size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].size() == rows[0].size(), ErrorKind::kParse,
            path + ": row " + std::to_string(i + 1) + " has a different width");
    for (std::size_t c = 0; c < rows[i].size(); ++c) {
      const auto value = to_number(rows[i][c]);
      require(value.has_value(), ErrorKind::kParse,
              path + ": '" + rows[i][c] + "' is not a number");
      dense(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = *value;
    }
  }
  return SparseMatrix::from_dense(dense);
}

Coloring coloring_arg(const std::string& spec, std::size_t n) {
  if (spec == "unit") return Coloring::unit(n);
  if (spec == "discrete") return Coloring::discrete(n);
  const Coloring c = coloring_from_json(read_file(spec));
  require(c.size() == n, ErrorKind::kDimension,
          spec + ": coloring covers " + std::to_string(c.size()) + " indices, expected " +
              std::to_string(n));
  return c;
}

int cmd_inspect(const Flags& f, std::ostream& out) {
  const FloatKeyPolicy policy = policy_of(f.run);
  if (!f.equitable.empty()) {
    const SparseMatrix a = read_plain_matrix(f.equitable);
    const Coloring p0 = coloring_arg(f.rows, static_cast<std::size_t>(a.rows()));
    const Coloring q0 = coloring_arg(f.cols, static_cast<std::size_t>(a.cols()));
    const auto witness = equitability_witness(a, p0, q0, policy);
    json j;
    j["matrix"] = {{"rows", a.rows()}, {"cols", a.cols()}, {"nnz", a.nnz()}};
    j["input_equitable"] = !witness.has_value();
    j["input_witness"] = witness ? json(witness->describe()) : json(nullptr);
    j["coarsest"] = json::parse(to_json(coarsest_equitable(a, p0, q0, policy)));
    out << j.dump(2) << '\n';
    return kExitOk;
  }
  require(!f.data.input.empty(), ErrorKind::kParameter,
          "inspect needs a reduced-instance directory or --equitable MATRIX");
  const fs::path dir = f.data.input;
  const json manifest = json::parse(read_file(dir / "manifest.json"));
  json j;
  j["manifest"] = manifest;
  if (manifest.value("kind", "") == "kernel") {
    const KernelReduced r = read_kernel_reduced(dir);
    const std::string problem = check_kernel_reduced_standalone(r);
    j["summary"] = json::parse(compression_summary_json(r));
    j["standalone_check"] = problem.empty() ? json("ok") : json(problem);
    out << j.dump(2) << '\n';
    require(problem.empty(), ErrorKind::kInvariant, "stored kernel reduction: " + problem);
  } else {
    const ReducedInstance r = read_reduced_instance(dir);
    j["summary"] = json::parse(compression_summary_json(r));
    j["p"] = json::parse(to_json(r.p));
    j["q"] = json::parse(to_json(r.q));
    out << j.dump(2) << '\n';
  }
  return kExitOk;
}

}  // namespace

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kParameter:
    case ErrorKind::kLimit:
      return kExitFlags;
    case ErrorKind::kInvariant:
    case ErrorKind::kEvaluation:
      return kExitInvariant;
    default:
      return kExitInput;
  }
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Lossless compression of ERM training problems"};
  app.name("ermsquash");
  app.require_subcommand(1);
  Flags f;

  CLI::App* compress = app.add_subcommand("compress", "Write a reduced instance");
  add_data_flags(compress, f.data);
  add_model_flags(compress, f.model);
  add_run_flags(compress, f.run);
  compress->add_option("-o,--output", f.output, "Output directory")->required();
  compress->add_option("--matrix-format", f.matrix_format, "libsvm or csv")
      ->check(CLI::IsMember({"libsvm", "csv"}));

  CLI::App* fit = app.add_subcommand("fit", "Fit a model and print its parameters");
  add_data_flags(fit, f.data);
  add_model_flags(fit, f.model);
  add_run_flags(fit, f.run);
  fit->add_option("-o,--output", f.output, "Write JSON here instead of stdout");
  fit->add_flag("--via-reduction", f.via_reduction, "Fit the reduced problem and lift");

  CLI::App* verify = app.add_subcommand("verify", "Compare original and reduced optima");
  add_data_flags(verify, f.data);
  add_model_flags(verify, f.model);
  add_run_flags(verify, f.run);
  verify->add_option("--report", f.report_format, "table (default) or json")
      ->check(CLI::IsMember({"table", "json"}));
  verify->add_option("--max-rel-delta", f.max_rel_delta, "Relative objective threshold");
  verify->add_option("--max-abs-delta", f.max_abs_delta, "Absolute objective threshold");
  verify->add_option("--max-pred-delta", f.max_pred_delta, "Prediction threshold");

  CLI::App* bench = app.add_subcommand("bench", "Time original and reduced training");
  add_data_flags(bench, f.data);
  add_model_flags(bench, f.model);
  add_run_flags(bench, f.run);
  bench->add_option("--trials", f.trials, "Timing trials")->check(CLI::PositiveNumber);
  bench->add_option("--report", f.report_format, "json (default) or table")
      ->check(CLI::IsMember({"table", "json"}));

  CLI::App* inspect = app.add_subcommand("inspect", "Show colorings of a matrix or instance");
  inspect->add_option("input", f.data.input, "Reduced-instance directory");
  inspect->add_option("--equitable", f.equitable, "Matrix (CSV or LIBSVM) to refine");
  inspect->add_option("--rows", f.rows, "unit, discrete or a coloring JSON file");
  inspect->add_option("--cols", f.cols, "unit, discrete or a coloring JSON file");
  inspect->add_option("--quantize-digits", f.run.quantize_digits, "Round refinement sums")
      ->check(CLI::Range(0, 15));

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error:flags: " << e.what() << '\n';
    return kExitFlags;
  }

  try {
    if (compress->parsed()) return cmd_compress(f, out);
    if (fit->parsed()) return cmd_fit(f, out);
    if (verify->parsed()) return cmd_verify(f, out, err);
    if (bench->parsed()) return cmd_bench(f, out);
    return cmd_inspect(f, out);
  } catch (const Error& e) {
    err << "error:" << to_string(e.kind()) << ": " << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const json::exception& e) {
    err << "error:parse: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error:internal: " << e.what() << '\n';
    return kExitInvariant;
  }
}

}  // namespace ermsquash::cli
