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

#ifndef ERMSQUASH_KERNELS_HPP_
#define ERMSQUASH_KERNELS_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ermsquash/coloring.hpp"
#include "ermsquash/model.hpp"
#include "ermsquash/refinement.hpp"
#include "ermsquash/sparse_matrix.hpp"

namespace ermsquash {

// `requested` if positive, else ERM_SQUASH_THREADS if set and positive,
// else the hardware concurrency (at least 1).
int resolve_thread_count(int requested = 0);

// Dense kernel matrix stored with every entry kept. Exactly symmetric: only
// the upper triangle is evaluated and mirrored. The result does not depend on
// the thread count.
SparseMatrix compute_kernel(const SparseMatrix& x, const KernelSpec& kernel, int threads = 0);

// A compressed kernel instance. Loss rows are indexed by the colors of `p`,
// coefficients by the colors of `q`.
struct KernelReduced {
  SparseMatrix k_quad;            // Pi_Q^T K Pi_Q, |Q| x |Q|
  SparseMatrix k_logit;           // Pi_P^Scaled K Pi_Q, |P| x |Q|
  Eigen::VectorXd y;              // per P-color target
  Eigen::VectorXd sample_weights; // per P-color summed weight
  Coloring p;
  Coloring q;
  std::vector<int> row_color;     // Q-color containing each P-color
  double lambda = 0.0;
  ModelFamily family = ModelFamily::kKernelRidge;
  std::size_t n_original = 0;

  std::size_t n_reduced_rows() const { return static_cast<std::size_t>(k_logit.rows()); }
  std::size_t n_reduced_coefficients() const { return static_cast<std::size_t>(k_quad.rows()); }
};

// Q0 splits samples by (v_i, sum_j v_j K_ij y_j); Q is the coarsest
// symmetric equitable refinement; P = Q. y' is the per-color mean.
KernelReduced reduce_kernel_ridge(const SparseMatrix& k, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& v, double lambda,
                                  const FloatKeyPolicy& policy = {});

// Q as for kernel ridge; P splits every Q-color by label. Labels must be 0/1.
KernelReduced reduce_kernel_logistic(const SparseMatrix& k, const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& v, double lambda,
                                     const FloatKeyPolicy& policy = {});

// Re-verifies the reduction conditions from a kernel and a reduced instance:
// (Q, Q) equitable on K, v constant per Q-color, the initial key constant per
// Q-color, and K_quad / K_logit consistent with K. Returns an empty string on
// success, otherwise a description of the first violation.
std::string check_kernel_reduction(const SparseMatrix& k, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& v, const KernelReduced& reduced,
                                   const FloatKeyPolicy& policy = {});

}  // namespace ermsquash

#endif  // ERMSQUASH_KERNELS_HPP_
