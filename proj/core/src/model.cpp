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

#include "ermsquash/model.hpp"

#include <cmath>
#include <string>

#include "ermsquash/error.hpp"
#include "json.hpp"

namespace ermsquash {

void ModelSpec::validate() const {
  require(std::isfinite(lambda1) && std::isfinite(lambda2) && lambda1 >= 0.0 && lambda2 >= 0.0,
          ErrorKind::kParameter, "penalties must be finite and nonnegative");
  switch (family) {
    case ModelFamily::kLinreg:
      require(lambda1 == 0.0 && lambda2 == 0.0, ErrorKind::kParameter,
              "linreg takes no penalty; use ridge or elasticnet");
      break;
    case ModelFamily::kRidge:
      require(lambda1 == 0.0, ErrorKind::kParameter, "ridge takes no L1 penalty");
      break;
    case ModelFamily::kElasticNet:
      break;
    case ModelFamily::kLogisticBinary:
      require(num_classes == 2, ErrorKind::kParameter, "binary logistic needs num_classes = 2");
      break;
    case ModelFamily::kLogisticMulticlass:
      require(num_classes >= 2, ErrorKind::kParameter, "multiclass logistic needs >= 2 classes");
      break;
    case ModelFamily::kKernelRidge:
    case ModelFamily::kKernelLogistic:
      require(lambda1 == 0.0, ErrorKind::kParameter, "kernel models take no L1 penalty");
      require(lambda2 > 0.0, ErrorKind::kParameter, "kernel models need lambda > 0");
      require(kernel.kind != KernelSpec::Kind::kNone, ErrorKind::kParameter,
              "kernel models need a kernel");
      if (family == ModelFamily::kKernelLogistic) {
        require(num_classes == 2, ErrorKind::kParameter, "kernel logistic is binary");
      }
      break;
  }
  if (kernel.kind == KernelSpec::Kind::kRbf) {
    require(kernel.gamma > 0.0, ErrorKind::kParameter, "rbf kernel needs gamma > 0");
  }
  if (kernel.kind == KernelSpec::Kind::kPoly) {
    require(kernel.degree >= 1, ErrorKind::kParameter, "poly kernel needs degree >= 1");
  }
}

MergeMode ModelSpec::resolved_merge_mode() const {
  if (merge_mode != MergeMode::kAuto) return merge_mode;
  return is_classification() ? MergeMode::kPerLabel : MergeMode::kMeanTarget;
}

std::string_view to_string(ModelFamily family) {
  switch (family) {
    case ModelFamily::kLinreg: return "linreg";
    case ModelFamily::kRidge: return "ridge";
    case ModelFamily::kElasticNet: return "elasticnet";
    case ModelFamily::kLogisticBinary: return "logistic";
    case ModelFamily::kLogisticMulticlass: return "multiclass";
    case ModelFamily::kKernelRidge: return "kernel-ridge";
    case ModelFamily::kKernelLogistic: return "kernel-logistic";
  }
  return "unknown";
}

std::string_view to_string(MergeMode mode) {
  switch (mode) {
    case MergeMode::kAuto: return "auto";
    case MergeMode::kPerLabel: return "per_label";
    case MergeMode::kMeanTarget: return "mean_target";
  }
  return "unknown";
}

std::string_view to_string(KernelSpec::Kind kind) {
  switch (kind) {
    case KernelSpec::Kind::kNone: return "none";
    case KernelSpec::Kind::kLinear: return "linear";
    case KernelSpec::Kind::kRbf: return "rbf";
    case KernelSpec::Kind::kPoly: return "poly";
  }
  return "unknown";
}

ModelFamily parse_model_family(std::string_view name) {
  if (name == "linreg" || name == "linear") return ModelFamily::kLinreg;
  if (name == "ridge") return ModelFamily::kRidge;
  if (name == "elasticnet" || name == "elastic-net") return ModelFamily::kElasticNet;
  if (name == "logistic" || name == "logistic_binary") return ModelFamily::kLogisticBinary;
  if (name == "multiclass" || name == "logistic_multiclass") {
    return ModelFamily::kLogisticMulticlass;
  }
  if (name == "kernel-ridge" || name == "kernel_ridge") return ModelFamily::kKernelRidge;
  if (name == "kernel-logistic" || name == "kernel_logistic") {
    return ModelFamily::kKernelLogistic;
  }
  fail(ErrorKind::kParameter, "unknown model family '" + std::string(name) + "'");
}

MergeMode parse_merge_mode(std::string_view name) {
  if (name == "auto") return MergeMode::kAuto;
  if (name == "per_label" || name == "per-label") return MergeMode::kPerLabel;
  if (name == "mean_target" || name == "mean-target") return MergeMode::kMeanTarget;
  fail(ErrorKind::kParameter, "unknown merge mode '" + std::string(name) + "'");
}

KernelSpec::Kind parse_kernel_kind(std::string_view name) {
  if (name == "none") return KernelSpec::Kind::kNone;
  if (name == "linear") return KernelSpec::Kind::kLinear;
  if (name == "rbf") return KernelSpec::Kind::kRbf;
  if (name == "poly") return KernelSpec::Kind::kPoly;
  fail(ErrorKind::kParameter, "unknown kernel '" + std::string(name) + "'");
}

std::string to_json(const ModelSpec& spec) {
  nlohmann::json j;
  j["family"] = to_string(spec.family);
  j["lambda1"] = spec.lambda1;
  j["lambda2"] = spec.lambda2;
  j["num_classes"] = spec.num_classes;
  j["kernel"] = {{"kind", to_string(spec.kernel.kind)},
                 {"gamma", spec.kernel.gamma},
                 {"degree", spec.kernel.degree},
                 {"coef0", spec.kernel.coef0}};
  j["merge_mode"] = to_string(spec.resolved_merge_mode());
  j["standardize"] = spec.standardize;
  j["penalize_bias"] = spec.penalize_bias;
  return j.dump();
}

ModelSpec model_spec_from_json(std::string_view text) {
  try {
    const nlohmann::json j = nlohmann::json::parse(text);
    ModelSpec spec;
    spec.family = parse_model_family(j.at("family").get<std::string>());
    spec.lambda1 = j.at("lambda1").get<double>();
    spec.lambda2 = j.at("lambda2").get<double>();
    spec.num_classes = j.at("num_classes").get<int>();
    const auto& k = j.at("kernel");
    spec.kernel.kind = parse_kernel_kind(k.at("kind").get<std::string>());
    spec.kernel.gamma = k.at("gamma").get<double>();
    spec.kernel.degree = k.at("degree").get<int>();
    spec.kernel.coef0 = k.at("coef0").get<double>();
    spec.merge_mode = parse_merge_mode(j.at("merge_mode").get<std::string>());
    spec.standardize = j.at("standardize").get<bool>();
    spec.penalize_bias = j.at("penalize_bias").get<bool>();
    return spec;
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorKind::kParse, std::string("model spec JSON: ") + e.what());
  }
}

}  // namespace ermsquash
