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

#ifndef ERMSQUASH_MODEL_HPP_
#define ERMSQUASH_MODEL_HPP_

#include <string>
#include <string_view>

#include <Eigen/Core>

namespace ermsquash {

enum class ModelFamily {
  kLinreg,
  kRidge,
  kElasticNet,
  kLogisticBinary,
  kLogisticMulticlass,
  kKernelRidge,
  kKernelLogistic,
};

enum class MergeMode {
  kAuto,        // mean_target for regression, per_label for classification
  kPerLabel,    // one weighted row per label value present in a sample color
  kMeanTarget,  // one row per sample color with the weighted mean target
};

struct KernelSpec {
  enum class Kind { kNone, kLinear, kRbf, kPoly };

  Kind kind = Kind::kNone;
  double gamma = 1.0;  // rbf: exp(-gamma * |x - x'|^2)
  int degree = 2;      // poly: (x . x' + coef0)^degree
  double coef0 = 0.0;
};

// ERM family and hyperparameters. For kernel families `lambda2` is the
// coefficient of the alpha' K alpha regularizer.
struct ModelSpec {
  ModelFamily family = ModelFamily::kLinreg;
  double lambda1 = 0.0;
  double lambda2 = 0.0;
  int num_classes = 2;
  KernelSpec kernel;
  MergeMode merge_mode = MergeMode::kAuto;
  bool standardize = false;
  // X carries its own ones column and no separate intercept is fit, so the
  // bias is penalized like any other coefficient.
  bool penalize_bias = false;

  void validate() const;

  bool is_kernel() const {
    return family == ModelFamily::kKernelRidge || family == ModelFamily::kKernelLogistic;
  }
  bool is_classification() const {
    return family == ModelFamily::kLogisticBinary ||
           family == ModelFamily::kLogisticMulticlass ||
           family == ModelFamily::kKernelLogistic;
  }
  bool is_regularized() const { return lambda1 > 0.0 || lambda2 > 0.0; }
  MergeMode resolved_merge_mode() const;
};

std::string_view to_string(ModelFamily family);
std::string_view to_string(MergeMode mode);
std::string_view to_string(KernelSpec::Kind kind);
ModelFamily parse_model_family(std::string_view name);
MergeMode parse_merge_mode(std::string_view name);
KernelSpec::Kind parse_kernel_kind(std::string_view name);

std::string to_json(const ModelSpec& spec);
// Inverse of to_json; the merge mode comes back resolved.
ModelSpec model_spec_from_json(std::string_view text);

// Training targets. `values` holds a regression value, a binary label (or a
// fraction in [0, 1] after mean-target merging) or a class id. `probs` is
// only set for multiclass mean-target instances and then holds one
// probability row per sample.
struct Targets {
  Eigen::VectorXd values;
  Eigen::MatrixXd probs;

  Eigen::Index size() const { return probs.size() > 0 ? probs.rows() : values.size(); }
  bool has_probs() const { return probs.size() > 0; }
};

}  // namespace ermsquash

#endif  // ERMSQUASH_MODEL_HPP_
