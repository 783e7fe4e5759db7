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

#ifndef ERMSQUASH_REDUCTIONS_HPP_
#define ERMSQUASH_REDUCTIONS_HPP_

#include <cstddef>
#include <vector>

#include <Eigen/Core>

#include "ermsquash/coloring.hpp"
#include "ermsquash/model.hpp"
#include "ermsquash/refinement.hpp"
#include "ermsquash/sparse_matrix.hpp"

namespace ermsquash {

// A compressed primal ERM instance.
struct ReducedInstance {
  SparseMatrix x;                    // reduced rows x |Q|
  Targets targets;                   // one entry per reduced row
  Eigen::VectorXd sample_weights;    // v'
  Coloring p;                        // sample coloring of the original rows
  Coloring q;                        // feature coloring of the original columns
  std::vector<int> row_color;        // P-color behind each reduced row
  Eigen::VectorXd penalty_multipliers;  // |T| per feature color
  ModelSpec model;
  std::size_t n_original = 0;
  std::size_t d_original = 0;

  std::size_t n_reduced() const { return static_cast<std::size_t>(x.rows()); }
  std::size_t d_reduced() const { return static_cast<std::size_t>(x.cols()); }
};

struct InitialColorings {
  Coloring rows;
  Coloring cols;
};

// P0 = unit, Q0 split by (X^T y)_j.
InitialColorings init_coloring_linreg(const SparseMatrix& x, const Eigen::VectorXd& y,
                                      const FloatKeyPolicy& policy = {});

// P0 split by v_i, Q0 split by sum_i v_i X_ij y_i (binary, y in {0, 1}) or by
// the tuple of per-class sums sum_i v_i X_ij 1{y_i = c} (num_classes > 2).
InitialColorings init_coloring_logistic(const SparseMatrix& x, const Eigen::VectorXd& y,
                                        const Eigen::VectorXd& v, int num_classes,
                                        const FloatKeyPolicy& policy = {});

// Full compression pipeline for primal families: initial colorings, coarsest
// equitable refinement, reduced data and a post-check of the reduction
// conditions. Throws ErrorKind::kInvariant if the post-check fails.
ReducedInstance reduce_erm(const SparseMatrix& x, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& v, const ModelSpec& spec,
                           const FloatKeyPolicy& policy = {});

// Columns are every monomial of total degree 1..degree, graded by degree and
// in combinations-with-replacement order within a degree.
SparseMatrix expand_polynomial(const SparseMatrix& x, int degree);

struct WeightedData {
  SparseMatrix x;
  Eigen::VectorXd y;
};

// diag(sqrt(v)) X and diag(sqrt(v)) y. Include any bias column in X first.
WeightedData absorb_sample_weights(const SparseMatrix& x, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& v);

struct LiftedParams {
  Eigen::MatrixXd w;  // D x 1, or D x K for multiclass
  Eigen::VectorXd b;
};

// w = Pi_Q w' (row-wise for matrices); the bias is copied.
LiftedParams lift_solution(const Eigen::MatrixXd& w_reduced, const Eigen::VectorXd& b_reduced,
                           const Coloring& q);

// Per-feature statistics of StandardScaler (population standard deviation).
struct StandardScaler {
  Eigen::VectorXd mean;
  Eigen::VectorXd scale;
  std::vector<int> constant_features;  // zero variance; scale forced to 1

  static StandardScaler fit(const Eigen::Ref<const Eigen::MatrixXd>& x);
  Eigen::MatrixXd transform(const Eigen::Ref<const Eigen::MatrixXd>& x) const;
};

struct BackTransformed {
  Eigen::MatrixXd w;
  Eigen::VectorXd b;
  std::vector<int> constant_features;
};

// Maps parameters fitted on standardized features back to raw features:
// w = w_sc / sigma, b = b_sc - w . mu (column-wise for multiclass). A zero
// sigma is treated as 1 and reported in constant_features.
BackTransformed scaler_backtransform(const Eigen::MatrixXd& w_scaled,
                                     const Eigen::VectorXd& b_scaled, const Eigen::VectorXd& mu,
                                     const Eigen::VectorXd& sigma);

struct ReducedPenalty {
  Eigen::VectorXd multipliers;  // |T|
  double lambda1 = 0.0;
  double lambda2 = 0.0;

  // sum_T |T| (lambda2 w_T^2 + lambda1 |w_T|), summed over columns.
  double value(const Eigen::MatrixXd& w_reduced) const;
};

ReducedPenalty elastic_net_reduced_penalty(const Coloring& q, double lambda1, double lambda2);

}  // namespace ermsquash

#endif  // ERMSQUASH_REDUCTIONS_HPP_
