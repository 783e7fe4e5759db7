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

#ifndef ERMSQUASH_SRC_OPTIMIZE_HPP_
#define ERMSQUASH_SRC_OPTIMIZE_HPP_

#include <functional>
#include <vector>

#include <Eigen/Core>

#include "ermsquash/solvers.hpp"

namespace ermsquash::detail {

// Returns f(x) and writes its gradient.
using SmoothFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct OptimizeResult {
  Eigen::VectorXd x;
  double objective = 0.0;  // includes the L1 term
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
  std::vector<double> trace;
};

// L-BFGS with monotone Armijo backtracking (up to rounding noise in f). Stops when the gradient
// inf-norm reaches options.tol.
OptimizeResult minimize_lbfgs(const SmoothFn& f, Eigen::VectorXd x0, const SolverOptions& options);

// Minimizes f(x) + sum_i l1[i] |x_i| by proximal gradient with
// Barzilai-Borwein steps and monotone backtracking. Stops when the
// unit-step proximal residual inf-norm reaches options.tol.
OptimizeResult minimize_proximal(const SmoothFn& f, Eigen::VectorXd x0, const Eigen::VectorXd& l1,
                                 const SolverOptions& options);

}  // namespace ermsquash::detail

#endif  // ERMSQUASH_SRC_OPTIMIZE_HPP_
