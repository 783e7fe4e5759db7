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

#ifndef ERMSQUASH_SOLVERS_HPP_
#define ERMSQUASH_SOLVERS_HPP_

#include <string>
#include <vector>

#include <Eigen/Core>

#include "ermsquash/kernels.hpp"
#include "ermsquash/model.hpp"
#include "ermsquash/reductions.hpp"
#include "ermsquash/sparse_matrix.hpp"

namespace ermsquash {

struct SolverOptions {
  // On the gradient (or proximal residual) inf-norm, relative to
  // max(1, total sample weight).
  double tol = 1e-8;
  int max_iter = 10000;
  // Fit in StandardScaler coordinates and map the result back to raw
  // features. Only applied to unpenalized iterative fits, where it is an
  // exact reparametrization.
  bool standardize = false;
  bool record_trace = false;  // objective after every accepted iteration
  int lbfgs_memory = 10;
};

struct FitResult {
  Eigen::MatrixXd coefficients;  // d x 1, d x K (multiclass) or alpha as |Q| x 1
  Eigen::VectorXd bias;          // one entry per coefficient column
  double objective = 0.0;
  int iterations = 0;
  double grad_inf_norm = 0.0;    // gradient, or proximal residual when lambda1 > 0
  bool converged = false;
  bool least_norm = false;       // singular closed-form system
  bool standardized = false;
  int rank = -1;                 // closed-form solves only
  double wall_time = 0.0;        // seconds
  std::vector<double> trace;
};

std::string to_json(const FitResult& fit);

// Weighted least squares with the penalty sum_T m_T (lambda2 w_T^2 +
// lambda1 |w_T|). Without L1 the normal equations are solved by a complete
// orthogonal decomposition (least-norm on singular systems); with L1 a
// monotone proximal-gradient method is used. With penalize_bias the design is
// taken as already holding a ones column and no separate bias is fit.
FitResult solve_least_squares(const SparseMatrix& x, const Eigen::VectorXd& y,
                              const Eigen::VectorXd& v, const ReducedPenalty& penalty,
                              bool penalize_bias = false, const SolverOptions& options = {});

// Weighted cross-entropy plus penalty. Binary (multinomial = false): sigmoid
// link, targets.values in [0, 1]. Multinomial: softmax over num_classes
// columns, targets are class ids in targets.values or rows of targets.probs.
// The bias is never penalized; fit_intercept = false fixes it at zero.
FitResult solve_logistic(const SparseMatrix& x, const Targets& targets, const Eigen::VectorXd& v,
                         const ReducedPenalty& penalty, int num_classes, bool multinomial,
                         bool fit_intercept = true, const SolverOptions& options = {});

// Minimizes sum v (K_logit a + b - y)^2 + lambda a' K_quad a through its
// stationarity system, least-norm when singular.
FitResult solve_kernel_ridge(const SparseMatrix& k_logit, const SparseMatrix& k_quad,
                             const Eigen::VectorXd& y, const Eigen::VectorXd& v, double lambda);

// Minimizes weighted binary cross-entropy of sigmoid(K_logit a + b) plus
// lambda a' K_quad a.
FitResult solve_kernel_logistic(const SparseMatrix& k_logit, const SparseMatrix& k_quad,
                                const Eigen::VectorXd& y, const Eigen::VectorXd& v,
                                double lambda, const SolverOptions& options = {});

// Dispatch on spec.family for primal instances. `multipliers` holds one
// penalty multiplier per column of x.
FitResult fit_primal(const SparseMatrix& x, const Targets& targets, const Eigen::VectorXd& v,
                     const ModelSpec& spec, const Eigen::VectorXd& multipliers,
                     const SolverOptions& options = {});
FitResult fit_reduced(const ReducedInstance& instance, const SolverOptions& options = {});
FitResult fit_kernel(const KernelReduced& instance, const SolverOptions& options = {});

struct Evaluation {
  double objective = 0.0;
  // Regression: n x 1 fitted values. Binary: n x 1 probabilities.
  // Multiclass: n x K class probabilities.
  Eigen::MatrixXd predictions;
};

// Exact training objective and per-sample predictions of a primal model.
Evaluation evaluate_primal(const ModelSpec& spec, const SparseMatrix& x, const Targets& targets,
                           const Eigen::VectorXd& v, const Eigen::VectorXd& multipliers,
                           const Eigen::MatrixXd& w, const Eigen::VectorXd& b);

// Same for kernel families (K_logit rows are the loss rows).
Evaluation evaluate_kernel(ModelFamily family, const SparseMatrix& k_logit,
                           const SparseMatrix& k_quad, const Eigen::VectorXd& y,
                           const Eigen::VectorXd& v, double lambda, const Eigen::VectorXd& alpha,
                           double b);

// Analytic value and gradient of the smooth part of the primal objective
// (L1 excluded) at the packed parameters [vec(W); b]. Exposed for gradient
// checks.
double primal_smooth_objective(const ModelSpec& spec, const SparseMatrix& x,
                               const Targets& targets, const Eigen::VectorXd& v,
                               const Eigen::VectorXd& multipliers, const Eigen::VectorXd& params,
                               Eigen::VectorXd* gradient);

// Same for kernel families at [alpha; b].
double kernel_smooth_objective(ModelFamily family, const SparseMatrix& k_logit,
                               const SparseMatrix& k_quad, const Eigen::VectorXd& y,
                               const Eigen::VectorXd& v, double lambda,
                               const Eigen::VectorXd& params, Eigen::VectorXd* gradient);

}  // namespace ermsquash

#endif  // ERMSQUASH_SOLVERS_HPP_
