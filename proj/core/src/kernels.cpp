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

#include "ermsquash/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "ermsquash/error.hpp"

namespace ermsquash {
namespace {

double int_pow(double base, int exponent) {
  double out = 1.0;
  for (int e = 0; e < exponent; ++e) out *= base;
  return out;
}

// Sparse dot product of two CSR rows.
double row_dot(const SparseMatrix& x, int a, int b) {
  const auto ca = x.row_indices(a), cb = x.row_indices(b);
  const auto va = x.row_values(a), vb = x.row_values(b);
  double s = 0.0;
  std::size_t p = 0, q = 0;
  while (p < ca.size() && q < cb.size()) {
    if (ca[p] < cb[q]) {
      ++p;
    } else if (cb[q] < ca[p]) {
      ++q;
    } else {
      s += va[p++] * vb[q++];
    }
  }
  return s;
}

double row_sq_dist(const SparseMatrix& x, int a, int b) {
  const auto ca = x.row_indices(a), cb = x.row_indices(b);
  const auto va = x.row_values(a), vb = x.row_values(b);
  double s = 0.0;
  std::size_t p = 0, q = 0;
  while (p < ca.size() || q < cb.size()) {
    double diff;
    if (q == cb.size() || (p < ca.size() && ca[p] < cb[q])) {
      diff = va[p++];
    } else if (p == ca.size() || cb[q] < ca[p]) {
      diff = vb[q++];
    } else {
      diff = va[p++] - vb[q++];
    }
    s += diff * diff;
  }
  return s;
}

void check_inputs(const SparseMatrix& k, const Eigen::VectorXd& y, const Eigen::VectorXd& v,
                  double lambda) {
  require(k.rows() == k.cols(), ErrorKind::kStructure, "kernel matrix must be square");
  require(k.rows() > 0, ErrorKind::kEmpty, "empty kernel matrix");
  require(k.is_symmetric(), ErrorKind::kStructure, "kernel matrix must be symmetric");
  require(y.size() == k.rows() && v.size() == k.rows(), ErrorKind::kDimension,
          "targets and weights must have one entry per kernel row");
  require(std::isfinite(lambda) && lambda > 0.0, ErrorKind::kParameter, "lambda must be > 0");
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    require(std::isfinite(v[i]) && v[i] > 0.0, ErrorKind::kParameter,
            "sample weights must be positive");
  }
}

Eigen::VectorXd key_sums(const SparseMatrix& k, const Eigen::VectorXd& y,
                         const Eigen::VectorXd& v) {
  return k.multiply(v.cwiseProduct(y));
}

Coloring initial_q(const SparseMatrix& k, const Eigen::VectorXd& y, const Eigen::VectorXd& v,
                   const FloatKeyPolicy& policy) {
  const Eigen::VectorXd sums = key_sums(k, y, v);
  std::vector<std::pair<std::int64_t, std::int64_t>> keys(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    keys[i] = {FloatKeyPolicy{}.key(v[i]), policy.key(sums[i])};
  }
  return split_by_keys(Coloring::unit(keys.size()), keys);
}

struct Blocks {
  Eigen::MatrixXd quad;   // |Q| x |Q|
  Eigen::MatrixXd logit;  // |P| x |Q|
};

Blocks block_sums(const SparseMatrix& k, const Coloring& p, const Coloring& q) {
  const int nq = q.num_colors();
  Blocks out{Eigen::MatrixXd::Zero(nq, nq), Eigen::MatrixXd::Zero(p.num_colors(), nq)};
  std::vector<bool> has_rep(static_cast<std::size_t>(p.num_colors()), false);
  Eigen::VectorXd row(nq);
  for (int i = 0; i < k.rows(); ++i) {
    row.setZero();
    const auto cols = k.row_indices(i);
    const auto vals = k.row_values(i);
    for (std::size_t t = 0; t < cols.size(); ++t) row[q[cols[t]]] += vals[t];
    out.quad.row(q[i]) += row.transpose();
    if (!has_rep[p[i]]) {
      has_rep[p[i]] = true;
      out.logit.row(p[i]) = row.transpose();
    }
  }
  // Mirror the upper triangle so the regularizer matrix is exactly symmetric.
  for (int s = 0; s < nq; ++s) {
    for (int t = 0; t < s; ++t) out.quad(s, t) = out.quad(t, s);
  }
  return out;
}

KernelReduced assemble(const SparseMatrix& k, const Eigen::VectorXd& y, const Eigen::VectorXd& v,
                       Coloring p, Coloring q, double lambda, ModelFamily family) {
  KernelReduced out;
  const Blocks blocks = block_sums(k, p, q);
  out.k_quad = SparseMatrix::from_dense(blocks.quad, true);
  out.k_logit = SparseMatrix::from_dense(blocks.logit, true);
  out.sample_weights = aggregate(v, p, AggregateMode::kSum);
  // Weights are constant within a color, so the plain mean is the weighted mean.
  out.y = aggregate(y, p, AggregateMode::kMean);
  out.row_color.assign(static_cast<std::size_t>(p.num_colors()), -1);
  for (std::size_t i = 0; i < p.size(); ++i) out.row_color[p[i]] = q[i];
  out.p = std::move(p);
  out.q = std::move(q);
  out.lambda = lambda;
  out.family = family;
  out.n_original = static_cast<std::size_t>(k.rows());
  return out;
}

void enforce(const SparseMatrix& k, const Eigen::VectorXd& y, const Eigen::VectorXd& v,
             const KernelReduced& r, const FloatKeyPolicy& policy) {
  const std::string problem = check_kernel_reduction(k, y, v, r, policy);
  if (!problem.empty()) fail(ErrorKind::kInvariant, problem);
}

}  // namespace

int resolve_thread_count(int requested) {
  if (requested > 0) return requested;
  if (const char* env = std::getenv("ERM_SQUASH_THREADS")) {
    char* end = nullptr;
    const long value = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && value > 0) return static_cast<int>(value);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

SparseMatrix compute_kernel(const SparseMatrix& x, const KernelSpec& kernel, int threads) {
  using Kind = KernelSpec::Kind;
  require(kernel.kind != Kind::kNone, ErrorKind::kParameter, "no kernel selected");
  if (kernel.kind == Kind::kRbf) {
    require(kernel.gamma > 0.0, ErrorKind::kParameter, "rbf kernel needs gamma > 0");
  }
  if (kernel.kind == Kind::kPoly) {
    require(kernel.degree >= 1, ErrorKind::kParameter, "poly kernel needs degree >= 1");
  }
  const int n = x.rows();
  Eigen::MatrixXd k(n, n);
  auto entry = [&](int a, int b) {
    switch (kernel.kind) {
      case Kind::kLinear: return row_dot(x, a, b);
      case Kind::kRbf: return std::exp(-kernel.gamma * row_sq_dist(x, a, b));
      case Kind::kPoly: return int_pow(row_dot(x, a, b) + kernel.coef0, kernel.degree);
      case Kind::kNone: break;
    }
    return 0.0;
  };
  const int workers = std::min(resolve_thread_count(threads), std::max(1, n));
  // Rows are dealt round-robin so that triangle work is balanced.
  auto work = [&](int w) {
    for (int a = w; a < n; a += workers) {
      for (int b = a; b < n; ++b) k(a, b) = entry(a, b);
    }
  };
  if (workers == 1) {
    work(0);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
  }
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < a; ++b) k(a, b) = k(b, a);
  }
  return SparseMatrix::from_dense(k, true);
}

KernelReduced reduce_kernel_ridge(const SparseMatrix& k, const Eigen::VectorXd& y,
                                  const Eigen::VectorXd& v, double lambda,
                                  const FloatKeyPolicy& policy) {
  check_inputs(k, y, v, lambda);
  Coloring q = symmetric_coarsest_equitable(k, initial_q(k, y, v, policy), policy);
  Coloring p = q;
  KernelReduced out =
      assemble(k, y, v, std::move(p), std::move(q), lambda, ModelFamily::kKernelRidge);
  enforce(k, y, v, out, policy);
  return out;
}

KernelReduced reduce_kernel_logistic(const SparseMatrix& k, const Eigen::VectorXd& y,
                                     const Eigen::VectorXd& v, double lambda,
                                     const FloatKeyPolicy& policy) {
  check_inputs(k, y, v, lambda);
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    require(y[i] == 0.0 || y[i] == 1.0, ErrorKind::kParameter,
            "kernel logistic labels must be 0 or 1 (row " + std::to_string(i) + ")");
  }
  Coloring q = symmetric_coarsest_equitable(k, initial_q(k, y, v, policy), policy);
  std::vector<int> label(static_cast<std::size_t>(y.size()));
  for (Eigen::Index i = 0; i < y.size(); ++i) label[i] = static_cast<int>(y[i]);
  Coloring p = split_by_keys(q, label);
  KernelReduced out =
      assemble(k, y, v, std::move(p), std::move(q), lambda, ModelFamily::kKernelLogistic);
  enforce(k, y, v, out, policy);
  return out;
}

std::string check_kernel_reduction(const SparseMatrix& k, const Eigen::VectorXd& y,
                                   const Eigen::VectorXd& v, const KernelReduced& r,
                                   const FloatKeyPolicy& policy) {
  const auto n = static_cast<std::size_t>(k.rows());
  if (r.q.size() != n || r.p.size() != n || static_cast<std::size_t>(y.size()) != n ||
      static_cast<std::size_t>(v.size()) != n) {
    return "reduced instance does not match the kernel dimension";
  }
  if (!r.p.refines(r.q)) return "loss-row coloring does not refine the coefficient coloring";
  if (const auto w = equitability_witness(k, r.q, r.q, policy)) {
    return "(Q, Q) is not equitable on K: " + w->describe();
  }
  const Eigen::VectorXd sums = key_sums(k, y, v);
  std::vector<int> first(static_cast<std::size_t>(r.q.num_colors()), -1);
  std::vector<int> first_p(static_cast<std::size_t>(r.p.num_colors()), -1);
  for (std::size_t i = 0; i < n; ++i) {
    const int t = r.q[i];
    if (first[t] < 0) {
      first[t] = static_cast<int>(i);
    } else {
      const int f = first[t];
      if (v[f] != v[i]) {
        return "sample weights differ inside color " + std::to_string(t) + " (indices " +
               std::to_string(f) + ", " + std::to_string(i) + ")";
      }
      if (policy.key(sums[f]) != policy.key(sums[i])) {
        return "weighted label sums differ inside color " + std::to_string(t) + " (indices " +
               std::to_string(f) + ", " + std::to_string(i) + ")";
      }
    }
    const int s = r.p[i];
    if (first_p[s] < 0) {
      first_p[s] = static_cast<int>(i);
    } else if (r.family == ModelFamily::kKernelLogistic && y[first_p[s]] != y[i]) {
      return "labels differ inside loss row " + std::to_string(s);
    }
  }
  const Blocks blocks = block_sums(k, r.p, r.q);
  if (r.k_quad.to_dense() != blocks.quad) return "K_quad does not match Pi_Q^T K Pi_Q";
  if (r.k_logit.to_dense() != blocks.logit) return "K_logit does not match Pi_P^Scaled K Pi_Q";
  return {};
}

}  // namespace ermsquash
