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

#ifndef ERMSQUASH_SERIALIZATION_HPP_
#define ERMSQUASH_SERIALIZATION_HPP_

#include <filesystem>
#include <string>

#include "ermsquash/kernels.hpp"
#include "ermsquash/reductions.hpp"
#include "ermsquash/refinement.hpp"

namespace ermsquash {

enum class MatrixFormat { kLibsvm, kCsv };

std::string_view to_string(MatrixFormat format);
MatrixFormat parse_matrix_format(std::string_view name);

struct Provenance {
  std::string source;
  std::string input_sha256;
  FloatKeyPolicy policy;
};

// Directory layout:
//   reduced.svm | reduced.csv   X' (LIBSVM labels or the CSV "target" column
//                               hold targets.values; zeros for probability rows)
//   instance.json               targets, weights, colorings, multipliers, model
//   manifest.json               provenance and file list
//   summary.json                compression_summary_json
// Existing files are overwritten; the directory is created if needed.
void write_reduced_instance(const std::filesystem::path& dir, const ReducedInstance& instance,
                            const Provenance& provenance,
                            MatrixFormat format = MatrixFormat::kLibsvm);
ReducedInstance read_reduced_instance(const std::filesystem::path& dir);

// Same scheme with k_quad.{svm,csv} and k_logit.{svm,csv}. LIBSVM labels are
// |T| for K_quad rows and y' for K_logit rows.
void write_kernel_reduced(const std::filesystem::path& dir, const KernelReduced& instance,
                          const Provenance& provenance,
                          MatrixFormat format = MatrixFormat::kLibsvm);
KernelReduced read_kernel_reduced(const std::filesystem::path& dir);

// Sizes, ratios and color-size statistics.
std::string compression_summary_json(const ReducedInstance& instance);
std::string compression_summary_json(const KernelReduced& instance);

// Checks what a KernelReduced implies on its own: K_quad symmetric,
// K_quad[T, U] = |T| K_logit[S, U] for every loss row S inside T (relative
// 1e-12), equal K_logit rows within a coefficient color, and consistent color
// bookkeeping. Empty string on success.
std::string check_kernel_reduced_standalone(const KernelReduced& instance);

}  // namespace ermsquash

#endif  // ERMSQUASH_SERIALIZATION_HPP_
